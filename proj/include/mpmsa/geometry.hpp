#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mpmsa {

// Lattice point in Z^{nd}; particle j owns coordinates [j*d, (j+1)*d).
using Point = std::vector<int>;

// n-particle box: open cube of radius L around center in R^{nd}.
// Its lattice box holds the integer points with |x - u|_inf <= L - 1.
struct MPBox {
  Point center;
  int radius = 1;
  int n = 1;
  int d = 1;

  bool operator==(const MPBox&) const = default;
  bool operator<(const MPBox& o) const {
    if (radius != o.radius) return radius < o.radius;
    return center < o.center;
  }
  std::size_t lattice_count() const;
  Point particle(int j) const;
};

MPBox make_box(Point center, int radius, int n, int d);

int max_norm(std::span<const int> a, std::span<const int> b);
int max_norm(std::span<const int> a);

// Exact max-norm set distance between the open boxes.
int box_distance(const MPBox& a, const MPBox& b);

// Single-particle factor Λ_L(u_j), returned as a one-particle box. j is 0-based.
MPBox projection(const MPBox& box, int j);
std::vector<MPBox> full_projection(const MPBox& box);

bool contains(const MPBox& box, std::span<const int> x);
// Open-cube containment of sub-box in box.
bool contains_box(const MPBox& outer, const MPBox& inner);

std::vector<Point> lattice_points(const MPBox& box);
void for_each_lattice_point(const MPBox& box, const std::function<void(const Point&)>& f);

// Outer layer □_L \ □_{L-2}: lattice points at distance L-2 or L-1 from the center.
std::vector<Point> outer_layer(const MPBox& box);
// Lattice points at distance exactly L-1 from the center.
std::vector<Point> inner_boundary(const MPBox& box);
MPBox interior(const MPBox& box);

struct Annulus {
  Point center;
  int inner = 0;
  int outer = 1;

  int width() const { return outer - inner; }
  bool contains(std::span<const int> y) const;
  bool contains_box(const MPBox& b) const;
};

std::uint64_t kappa(int n);

// Annuli A_j = □_{L+jB} \ □_{L+(j-1)B}, j = 1..2κ(n)+1.
// width <= 0 selects B = 4n(L+R)+1.
std::vector<Annulus> annuli_family(const Point& center, int L, int n, double R, int width = 0);

enum class Direction { SecondFromFirst, FirstFromSecond };

struct SeparabilityVerdict {
  bool separable = false;
  std::vector<int> witness;  // 0-based particle indices
  Direction direction = Direction::SecondFromFirst;
};

// y is J-separable from x: the inflated J-projections of y avoid the other
// inflated projections of y and every inflated projection of x.
bool is_j_separable(const MPBox& y, const MPBox& x, std::span<const int> J, double R);

SeparabilityVerdict is_separable_pair(const MPBox& a, const MPBox& b, double R, int N);

// Boxes whose union holds every y not separable from □_L(x) (distance aside).
std::vector<MPBox> non_separable_cover(const Point& x, int n, int d, int L, double R);

enum class CubeClosure { Closed, Open };

// Partition of particle indices into chains of intersecting (L+R)-cubes.
std::vector<std::vector<int>> clump_decomposition(const Point& y, int n, int d, int L, double R,
                                                  CubeClosure closure = CubeClosure::Closed);

enum class InteractionTag { FI, PI };

struct InteractionClass {
  InteractionTag tag = InteractionTag::FI;
  std::vector<int> partition;    // best split J for PI boxes; may be empty
  double min_cross_gap = 0.0;    // infimum of the J-to-complement distance over the closed box
};

InteractionClass classify_interaction(const MPBox& box, double r0, int N);

// Max-norm distance from a lattice point to D^{(n)}.
int distance_to_diagonal(const Point& y, int n, int d, double r0, int N);

bool fi_projection_disjointness(const MPBox& a, const MPBox& b, double R);

std::string to_string(const MPBox& box);

}  // namespace mpmsa
