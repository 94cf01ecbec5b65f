#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "spi/errors.hpp"
#include "spi/image.hpp"

namespace spi {

// x^degree + sum of x^e over the remaining taps, coefficients in GF(2).
// taps always contains 0 and degree.
struct PrimitivePolynomial {
  int degree = 0;
  std::vector<int> taps;

  // Feedback mask: bit e set for every tap e < degree (bit 0 included).
  std::uint32_t feedback_mask() const;
};

// Maximal-length sequence of 0/1 values, period 2^degree - 1.
struct MlsSequence {
  int degree = 0;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1> bits;

  Eigen::Index length() const { return bits.size(); }
};

// Supported register lengths.
inline constexpr int kMinDegree = 2;
inline constexpr int kMaxDegree = 20;

// Start state used throughout: single 1 in the output-last slot, i.e. the
// register drains degree-1 zeros before the first 1 appears.
std::uint32_t canonical_seed(int degree);

// One known-good polynomial per degree in [2, 20].
const std::vector<PrimitivePolynomial>& polynomial_table();
const PrimitivePolynomial& primitive_polynomial(int degree);

// Fibonacci register: output = state bit 0, feedback = parity of the tapped
// bits, register shifts right with feedback entering at the top.
// Runs one full period and verifies it is exactly 2^degree - 1; a shorter
// (or longer) return to the seed means the polynomial is not primitive.
MlsSequence lfsr_sequence(const PrimitivePolynomial& poly, std::uint32_t seed);
MlsSequence lfsr_sequence(int degree);  // table polynomial, canonical seed

// Row j (1-based) of the cyclic S matrix: row_j[i] = bits[(i + j - 1) mod N].
Eigen::VectorXd smatrix_row(const MlsSequence& seq, Eigen::Index j);

// Row-major wrap of one row onto a p x q grid: pattern(r, c) = row[(r*q + c) mod N].
GrayImage tile_pattern(const Eigen::VectorXd& row, Eigen::Index p, Eigen::Index q);

// S matrix of order N = p*q = 2^degree - 1 held implicitly by its first row.
// Caches the DFT of that row since every measurement and reconstruction
// divides or multiplies by it.
class CyclicSMatrix {
 public:
  CyclicSMatrix(MlsSequence seq, Eigen::Index p, Eigen::Index q);
  static CyclicSMatrix from_degree(int degree, Eigen::Index p, Eigen::Index q);

  Eigen::Index n() const { return seq_.length(); }
  Eigen::Index pattern_rows() const { return p_; }
  Eigen::Index pattern_cols() const { return q_; }
  int degree() const { return seq_.degree; }
  const MlsSequence& sequence() const { return seq_; }

  Eigen::VectorXd row(Eigen::Index j) const { return smatrix_row(seq_, j); }
  GrayImage pattern(Eigen::Index j) const { return tile_pattern(row(j), p_, q_); }
  Eigen::VectorXd first_row() const { return row(1); }

  // DFT of the first row; bin 0 is (N+1)/2 and every other bin has squared
  // magnitude (N+1)/4, so the deconvolution divide is always safe.
  const Eigen::VectorXcd& kernel_dft() const;

 private:
  struct KernelCache;
  MlsSequence seq_;
  Eigen::Index p_ = 0, q_ = 0;
  std::shared_ptr<KernelCache> cache_;
};

}  // namespace spi
