#include "spi/mls.hpp"

#include <algorithm>
#include <bit>
#include <mutex>

#include "spi/fft.hpp"

namespace spi {

std::uint32_t PrimitivePolynomial::feedback_mask() const {
  std::uint32_t m = 0;
  for (int e : taps)
    if (e < degree) m |= 1u << e;
  return m;
}

std::uint32_t canonical_seed(int degree) {
  if (degree < kMinDegree || degree > kMaxDegree)
    throw UnsupportedDegree("canonical_seed: degree " + std::to_string(degree));
  return 1u << (degree - 1);
}

namespace {

PrimitivePolynomial make_poly(int degree, std::initializer_list<int> mid_taps) {
  PrimitivePolynomial p;
  p.degree = degree;
  p.taps.assign(mid_taps);
  p.taps.push_back(0);
  p.taps.push_back(degree);
  std::sort(p.taps.begin(), p.taps.end());
  return p;
}

// Returns the state period starting from `seed`, capped at limit+1.
std::uint64_t lfsr_period(const PrimitivePolynomial& poly, std::uint32_t seed,
                          std::uint64_t limit) {
  const std::uint32_t mask = poly.feedback_mask();
  const int top = poly.degree - 1;
  std::uint32_t s = seed;
  for (std::uint64_t step = 1; step <= limit; ++step) {
    const std::uint32_t fb = std::popcount(s & mask) & 1u;
    s = (s >> 1) | (fb << top);
    if (s == seed) return step;
  }
  return limit + 1;
}

// Smallest feedback mask whose register cycles through all 2^degree - 1
// nonzero states. Used for the low degrees not worth hardcoding.
PrimitivePolynomial search_primitive(int degree) {
  const std::uint64_t want = (1ull << degree) - 1;
  for (std::uint32_t m = 1; m < (1u << degree); m += 2) {  // constant term required
    PrimitivePolynomial p;
    p.degree = degree;
    for (int e = 0; e < degree; ++e)
      if (m & (1u << e)) p.taps.push_back(e);
    p.taps.push_back(degree);
    if (lfsr_period(p, canonical_seed(degree), want) == want) return p;
  }
  throw NonPrimitive("search_primitive: none found for degree " + std::to_string(degree));
}

std::vector<PrimitivePolynomial> build_table() {
  std::vector<PrimitivePolynomial> t;
  for (int d = 2; d <= 8; ++d) t.push_back(search_primitive(d));
  t.push_back(make_poly(9, {4}));
  t.push_back(make_poly(10, {3}));
  t.push_back(make_poly(11, {2}));
  t.push_back(make_poly(12, {7, 4, 3}));
  t.push_back(make_poly(13, {4, 3, 1}));
  t.push_back(make_poly(14, {12, 11, 1}));
  t.push_back(make_poly(15, {1}));
  t.push_back(make_poly(16, {5, 3, 2}));
  t.push_back(make_poly(17, {3}));
  t.push_back(make_poly(18, {7}));
  t.push_back(make_poly(19, {6, 5, 1}));
  t.push_back(make_poly(20, {3}));
  return t;
}

}  // namespace

const std::vector<PrimitivePolynomial>& polynomial_table() {
  static const std::vector<PrimitivePolynomial> table = build_table();
  return table;
}

const PrimitivePolynomial& primitive_polynomial(int degree) {
  if (degree < kMinDegree || degree > kMaxDegree)
    throw UnsupportedDegree("primitive_polynomial: degree " + std::to_string(degree) +
                            " outside [2, 20]");
  return polynomial_table()[degree - kMinDegree];
}

MlsSequence lfsr_sequence(const PrimitivePolynomial& poly, std::uint32_t seed) {
  if (poly.degree < kMinDegree || poly.degree > kMaxDegree)
    throw UnsupportedDegree("lfsr_sequence: degree " + std::to_string(poly.degree));
  const std::uint32_t state_mask =
      poly.degree == 32 ? ~0u : ((1u << poly.degree) - 1);
  seed &= state_mask;
  if (seed == 0) throw ZeroSeed("lfsr_sequence: register stuck at zero");

  const std::uint64_t n = (1ull << poly.degree) - 1;
  const std::uint32_t fb_mask = poly.feedback_mask();
  const int top = poly.degree - 1;

  MlsSequence seq;
  seq.degree = poly.degree;
  seq.bits.resize(static_cast<Eigen::Index>(n));

  std::uint32_t s = seed;
  for (std::uint64_t t = 0; t < n; ++t) {
    seq.bits[static_cast<Eigen::Index>(t)] = static_cast<std::uint8_t>(s & 1u);
    const std::uint32_t fb = std::popcount(s & fb_mask) & 1u;
    s = (s >> 1) | (fb << top);
    if (s == seed && t + 1 != n)
      throw NonPrimitive("lfsr_sequence: period " + std::to_string(t + 1) +
                         " < " + std::to_string(n));
  }
  if (s != seed)
    throw NonPrimitive("lfsr_sequence: state did not return after " + std::to_string(n) +
                       " steps");
  return seq;
}

MlsSequence lfsr_sequence(int degree) {
  return lfsr_sequence(primitive_polynomial(degree), canonical_seed(degree));
}

Eigen::VectorXd smatrix_row(const MlsSequence& seq, Eigen::Index j) {
  const Eigen::Index n = seq.length();
  if (j < 1 || j > n)
    throw IndexOutOfRange("smatrix_row: j = " + std::to_string(j) + ", rows are 1.." +
                          std::to_string(n));
  Eigen::VectorXd row(n);
  for (Eigen::Index i = 0; i < n; ++i) row[i] = seq.bits[(i + j - 1) % n];
  return row;
}

GrayImage tile_pattern(const Eigen::VectorXd& row, Eigen::Index p, Eigen::Index q) {
  const Eigen::Index n = row.size();
  if (p < 1 || q < 1 || p * q != n)
    throw BadFactorization("tile_pattern: " + std::to_string(p) + "x" + std::to_string(q) +
                           " != " + std::to_string(n));
  GrayImage img(p, q);
  for (Eigen::Index r = 0; r < p; ++r)
    for (Eigen::Index c = 0; c < q; ++c) img(r, c) = row[(r * q + c) % n];
  return img;
}

struct CyclicSMatrix::KernelCache {
  std::once_flag once;
  Eigen::VectorXcd dft;
};

CyclicSMatrix::CyclicSMatrix(MlsSequence seq, Eigen::Index p, Eigen::Index q)
    : seq_(std::move(seq)), p_(p), q_(q), cache_(std::make_shared<KernelCache>()) {
  const Eigen::Index n = seq_.length();
  if (n != (Eigen::Index(1) << seq_.degree) - 1)
    throw LengthMismatch("CyclicSMatrix: " + std::to_string(n) + " bits for degree " +
                         std::to_string(seq_.degree));
  if (p < 1 || q < 1 || p * q != n)
    throw BadFactorization("CyclicSMatrix: " + std::to_string(p) + "x" + std::to_string(q) +
                           " != " + std::to_string(n));
}

CyclicSMatrix CyclicSMatrix::from_degree(int degree, Eigen::Index p, Eigen::Index q) {
  return CyclicSMatrix(lfsr_sequence(degree), p, q);
}

const Eigen::VectorXcd& CyclicSMatrix::kernel_dft() const {
  std::call_once(cache_->once, [this] {
    cache_->dft = fft(Eigen::VectorXd(seq_.bits.cast<double>()));
  });
  return cache_->dft;
}

}  // namespace spi
