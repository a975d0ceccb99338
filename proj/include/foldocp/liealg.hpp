#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "foldocp/errors.hpp"

// SO(3) / so(3) primitives. Algebra elements are identified with R^3 through
// hat/vee; the dual so(3)* is identified with R^3 through the dot product.
namespace foldocp::liealg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Orthogonality tolerance enforced on every Rotation.
inline constexpr double kRotationTol = 1e-9;

// An element of SO(3). Construction checks orthogonality and orientation.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  // Throws ValidationError if m is not a rotation within kRotationTol.
  explicit Rotation(const Mat3& m);

  static Rotation identity() { return Rotation(); }

  const Mat3& matrix() const noexcept { return m_; }
  Rotation inverse() const;
  Rotation operator*(const Rotation& other) const;
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  // ||m^T m - I||_F
  double orthogonality_error() const;

 private:
  struct Unchecked {};
  Rotation(const Mat3& m, Unchecked) : m_(m) {}
  friend Rotation cay(const Vec3&);
  friend Rotation exp_so3(const Vec3&);
  friend Rotation orthonormalize(const Mat3&);

  Mat3 m_;
};

double orthogonality_error(const Mat3& m);

Mat3 hat(const Vec3& v);

// Inverse of hat. Throws SkewViolation when the symmetric part of m exceeds
// tol in Frobenius norm.
Vec3 vee(const Mat3& m, double tol = 1e-9);

// ad_x y = [x, y] = x cross y
Vec3 ad(const Vec3& x, const Vec3& y);
// ad*_x p, defined by <ad*_x p, eta> = <p, ad_x eta>; equals p cross x.
Vec3 coad(const Vec3& x, const Vec3& p);

// Cayley map cay(x) = (I - hat(x))^{-1} (I + hat(x)) in closed form
// I + 2 s hat(x) + 2 s hat(x)^2, s = 1 / (1 + |x|^2).
Rotation cay(const Vec3& x);

// Same map evaluated through an explicit 3x3 solve; used as a check on cay.
Mat3 cay_by_solve(const Vec3& x);

// Inverse Cayley map, hat(x) = (R - I)(R + I)^{-1}. Throws OutOfChart when
// R + I is numerically singular (rotation angle at pi).
Vec3 cay_inv(const Rotation& r);
Vec3 cay_inv(const Mat3& r);

// Right-trivialized differential of cay, normalized so that dcay(0, .) = id:
//   d/de cay(x + e v) cay(x)^{-1} |_{e=0} = hat(2 dcay(x, v)).
// As a matrix this is s (I + hat(x)), s = 1 / (1 + |x|^2).
Mat3 dcay_matrix(const Vec3& x);
Vec3 dcay(const Vec3& x, const Vec3& v);

// Inverse of dcay(x, .): (I - hat(x) + x x^T).
Mat3 dcay_inv_matrix(const Vec3& x);
Vec3 dcay_inv(const Vec3& x, const Vec3& w);

// Unnormalized form 2 s (I + hat(x)) as printed with the Cayley formulas.
Mat3 dcay_printed(const Vec3& x);

// Raw right-trivialized differential obtained by matrix calculus,
// vee(2 (I - X)^{-1} hat(v) (I + X)^{-1}). Independent of dcay_matrix.
Vec3 dcay_raw_matrix_calculus(const Vec3& x, const Vec3& v);

// Rodrigues formula.
Rotation exp_so3(const Vec3& x);

// Polar projection onto SO(3). Throws TooFarFromGroup when
// ||m^T m - I||_F > 1e-3 or det(m) < 0.
Rotation orthonormalize(const Mat3& m);
inline Rotation orthonormalize(const Rotation& r) { return orthonormalize(r.matrix()); }

// Inverse of exp_so3 on rotation angles below pi. Throws OutOfChart near pi.
Vec3 log_so3(const Rotation& r);

// Retraction used by the integrators, scaled so that R(xi) = I + hat(xi) + O(|xi|^2):
// Cayley gives R(xi) = cay(xi / 2), Exponential gives exp_so3(xi).
enum class Retraction { Cayley, Exponential };

Rotation retract(const Vec3& xi, Retraction r = Retraction::Cayley);
Vec3 retract_inv(const Rotation& g, Retraction r = Retraction::Cayley);
// Right-trivialized tangent of the retraction and its inverse:
//   d/de R(xi + e v) R(xi)^{-1} |_{e=0} = hat(dretract(xi) v).
Mat3 dretract(const Vec3& xi, Retraction r = Retraction::Cayley);
Mat3 dretract_inv(const Vec3& xi, Retraction r = Retraction::Cayley);

}  // namespace foldocp::liealg
