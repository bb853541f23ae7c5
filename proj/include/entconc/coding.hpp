// SPDX-License-Identifier: Apache-2.0
#pragma once

// Source-coding applications of the concentration inequality. Everything in
// this header works in bits unless a field says otherwise.
//
// Typical sets and essential bit content are computed with the method of
// types: sequences are grouped by their occupation vector, every member of a
// group has the same probability, and group sizes are exact multinomials.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "entconc/simplex.hpp"

namespace entconc {

using BigInt = boost::multiprecision::cpp_int;

/// A block of symbols, each in [0, K).
using Sequence = std::vector<std::uint32_t>;

/// i.i.d. source emitting blocks of length n.
struct SourceModel {
  ProbVector p;
  std::size_t n = 1;

  std::size_t K() const noexcept { return p.size(); }
  void validate() const;
};

/// log2 of a nonnegative big integer; -inf for zero.
double log2_big(const BigInt& x);

/// sum_t log2 p_{x_t}; -inf when a symbol has zero probability.
double seq_log2prob(std::span<const std::uint32_t> x, const ProbVector& p);

enum class Typicality { t1, t2, both };

/// (1/n) log2 (1/P(x)) - H(p) evaluated from the occupation vector of x, so
/// that sequences of one type always receive the same verdict. +inf for
/// impossible sequences.
double typicality_statistic(std::span<const std::uint32_t> counts, const ProbVector& p);

/// T1: statistic < eps. T2: statistic > -eps. `both`: the conjunction.
bool is_typical(std::span<const std::uint32_t> x, const ProbVector& p, double epsilon,
                Typicality variant);

struct TypeClass {
  std::vector<std::uint32_t> counts;
  double per_seq_log2prob = 0.0;
  BigInt multiplicity;
  double log2_multiplicity = 0.0;

  /// multiplicity * 2^per_seq_log2prob.
  double mass() const;
};

/// Default ceiling on C(n+K-1, K-1).
inline constexpr std::size_t kMaxCensusTypes = 10'000'000;

/// Number of occupation vectors, saturating at max+1 to signal overflow.
std::size_t type_count(std::size_t K, std::size_t n, std::size_t max = kMaxCensusTypes);

/// Every occupation vector in lexicographic order with its exact multiplicity.
/// Throws CensusTooLarge when the type count exceeds `max_types`.
std::vector<TypeClass> type_census(const SourceModel& model,
                                   std::size_t max_types = kMaxCensusTypes);

/// CSV with columns counts, log2prob, multiplicity (decimal).
void write_census_csv(std::ostream& out, const std::vector<TypeClass>& census);

struct TypicalSetStats {
  Typicality variant = Typicality::t1;
  double epsilon = 0.0;
  BigInt size;
  double log2_size = 0.0;
  double prob_mass = 0.0;
  /// log2_size < n (H + eps); only meaningful for T1 and `both`.
  bool counting_bound_holds = true;
};

TypicalSetStats typical_set_stats(const SourceModel& model, double epsilon, Typicality variant);

struct EssentialBitContent {
  double delta = 0.0;
  BigInt set_size;
  double h_delta = 0.0;
  double mass = 0.0;
  /// Probability of the least likely sequence in the set.
  double min_seq_prob = 0.0;
};

/// Size of the smallest set of sequences with mass at least 1 - delta.
EssentialBitContent essential_bit_content(const SourceModel& model, double delta);

struct SourceCodingThresholds {
  double n_upper = 0.0;
  double n_lower = 0.0;
};

/// Block lengths beyond which H_delta / n is within eps of H from above
/// (n_upper) and from below (n_lower). K below 5 is padded to 5.
SourceCodingThresholds source_coding_thresholds(std::size_t K, double delta, double epsilon);

struct SourceCodingRow {
  std::size_t n = 0;
  double entropy = 0.0;
  double rate = 0.0;  ///< H_delta / n
  bool upper_checked = false;
  bool upper_holds = false;
  double upper_margin = 0.0;  ///< (H + eps) - rate
  bool lower_checked = false;
  bool lower_holds = false;
  double lower_margin = 0.0;  ///< rate - (H - eps)
};

struct SourceCodingReport {
  SourceCodingThresholds thresholds;
  std::vector<SourceCodingRow> rows;

  /// No checked claim failed.
  bool passed() const noexcept;
};

SourceCodingReport verify_source_coding(const ProbVector& p, double delta, double epsilon,
                                        std::size_t n_first, std::size_t n_last);

/// Fixed-length code that indexes the T1 typical set by enumerative rank.
/// Index 0 is the all-zeros fallback for atypical inputs; typical sequences
/// get 1 + (offset of their type) + (lexicographic rank inside the type).
/// Decoding an index outside [1, |T1|] returns the first typical sequence.
class BlockCode {
 public:
  /// Throws VacuousCode when ceil(n (H + eps)) >= ceil(n log2 K).
  BlockCode(SourceModel model, double epsilon);

  const SourceModel& model() const noexcept { return model_; }
  double epsilon() const noexcept { return epsilon_; }
  std::size_t codeword_bits() const noexcept { return bits_; }
  const BigInt& typical_count() const noexcept { return typical_count_; }
  double typical_mass() const noexcept { return typical_mass_; }

  bool typical(std::span<const std::uint32_t> x) const;
  BigInt index(std::span<const std::uint32_t> x) const;
  Sequence sequence(const BigInt& index) const;

  /// Packed codeword, ceil(m / 8) bytes, most significant bit first.
  std::vector<std::uint8_t> encode(std::span<const std::uint32_t> x) const;
  Sequence decode(std::span<const std::uint8_t> codeword) const;

 private:
  struct TypicalType {
    std::vector<std::uint32_t> counts;
    BigInt offset;  // number of typical sequences in earlier types
    BigInt multiplicity;
  };

  std::optional<std::size_t> find_type(std::span<const std::uint32_t> counts) const;

  SourceModel model_;
  double epsilon_;
  std::size_t bits_ = 0;
  std::vector<TypicalType> types_;
  BigInt typical_count_;
  double typical_mass_ = 0.0;
};

BlockCode build_block_code(const SourceModel& model, double epsilon);

std::vector<std::uint8_t> pack_bits(const BigInt& value, std::size_t bits);
BigInt unpack_bits(std::span<const std::uint8_t> bytes, std::size_t bits);

struct CodeErrorReport {
  std::size_t replicates = 0;
  std::uint64_t failures = 0;
  double mc_error = 0.0;
  double ci_halfwidth = 0.0;
  double exact_error = 0.0;  ///< 1 - mass(T1)
  double bound = 0.0;        ///< exp(-n eps^2 / (4 (log2 max{K,5})^2))
  bool mc_matches_exact = false;
  bool exact_within_bound = false;
  bool mc_within_bound = false;
};

/// Monte Carlo decoding error on blocks drawn from the coding substream family
/// of `seed`, alongside the exact error from the census.
CodeErrorReport code_error(const BlockCode& code, std::size_t replicates, std::uint64_t seed,
                           std::size_t workers = 1);

struct RoundtripReport {
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::size_t draws = 0;
};

/// Encodes and decodes `samples` typical blocks drawn from the source.
/// Atypical draws are skipped; gives up after 1000 * samples draws.
RoundtripReport sampled_roundtrip(const BlockCode& code, std::size_t samples, std::uint64_t seed);

/// Checks every sequence of positive probability. Requires K^n <= 10^6.
RoundtripReport exhaustive_roundtrip(const BlockCode& code);

struct ErrorExponentResult {
  double epsilon = 0.0;  ///< bits
  bool feasible = false;
  std::optional<ProbVector> q_opt;
  double divergence = 0.0;  ///< D(Q||P) in nats; +inf when infeasible
  double tilt = 1.0;
  double target_entropy = 0.0;  ///< H(p) + eps in bits
};

/// Tilted distribution q_k proportional to p_k^beta (zeros stay zero).
ProbVector tilted(const ProbVector& p, double beta);

/// D(q || p) in nats, +inf when q puts mass where p has none.
double kl_divergence(const ProbVector& q, const ProbVector& p);

/// min D(Q||P) subject to H(Q) >= H(P) + eps over the simplex.
ErrorExponentResult error_exponent(const ProbVector& p, double epsilon);

/// exp(-n D* + K log(n + 1)) with D* in nats and K = p.size(). Unclamped.
double classical_error_bound(const ProbVector& p, double epsilon, std::size_t n);

/// exp(-n eps^2 / (4 (log2 max{K,5})^2)), eps in bits.
double coding_error_bound(std::size_t K, std::size_t n, double epsilon);

struct ExponentRow {
  std::size_t n = 0;
  std::size_t K = 0;
  double divergence = 0.0;
  double classical = 0.0;
  double block_code_bound = 0.0;
  bool classical_vacuous = false;
};

struct ExponentComparison {
  double epsilon = 0.0;
  std::vector<ExponentRow> rows;
  /// Per K in the grid: the smallest n from which the classical bound is
  /// below the new one, if any.
  std::vector<std::pair<std::size_t, std::optional<std::size_t>>> crossovers;
};

/// Evaluates both bounds on every (n, K) pair with K >= p.size(); p is padded
/// with zero-probability symbols up to K.
ExponentComparison compare_exponents(const ProbVector& p, double epsilon,
                                     const std::vector<std::size_t>& ns,
                                     const std::vector<std::size_t>& Ks);

/// Smallest n with classical < block_code_bound for all larger n, or nullopt.
std::optional<std::size_t> exponent_crossover(double divergence, std::size_t K, double epsilon);

}  // namespace entconc
