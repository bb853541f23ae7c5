// SPDX-License-Identifier: Apache-2.0
#include "entconc/coding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <thread>

#include "entconc/error.hpp"
#include "entconc/montecarlo.hpp"
#include "entconc/rng.hpp"

namespace entconc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::uint32_t> occupation(std::span<const std::uint32_t> x, std::size_t k) {
  std::vector<std::uint32_t> counts(k, 0);
  for (auto s : x) {
    if (s >= k) throw InvalidArgument("symbol " + std::to_string(s) + " outside the alphabet");
    ++counts[s];
  }
  return counts;
}

double type_log2prob(std::span<const std::uint32_t> counts, const ProbVector& p) {
  double total = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) continue;
    if (p[k] == 0.0) return -kInf;
    total += static_cast<double>(counts[k]) * std::log2(p[k]);
  }
  return total;
}

bool passes(double statistic, double epsilon, Typicality variant) {
  const bool t1 = statistic < epsilon;
  const bool t2 = statistic > -epsilon && std::isfinite(statistic);
  switch (variant) {
    case Typicality::t1: return t1;
    case Typicality::t2: return t2;
    case Typicality::both: return t1 && t2;
  }
  return false;
}

std::vector<BigInt> factorials(std::size_t n) {
  std::vector<BigInt> f(n + 1);
  f[0] = 1;
  for (std::size_t i = 1; i <= n; ++i) f[i] = f[i - 1] * static_cast<unsigned>(i);
  return f;
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("epsilon must be positive and finite");
  }
}

double padded_log2(std::size_t K) { return std::log2(static_cast<double>(std::max<std::size_t>(K, 5))); }

// Lexicographic rank of x among the arrangements of its own multiset.
BigInt multiset_rank(std::span<const std::uint32_t> x, std::vector<std::uint32_t> remaining,
                     BigInt arrangements) {
  BigInt rank = 0;
  auto len = static_cast<unsigned>(x.size());
  for (auto s : x) {
    for (std::uint32_t j = 0; j < s; ++j) {
      if (remaining[j] != 0) rank += arrangements * remaining[j] / len;
    }
    arrangements = arrangements * remaining[s] / len;
    --remaining[s];
    --len;
  }
  return rank;
}

Sequence multiset_unrank(BigInt rank, std::vector<std::uint32_t> remaining, BigInt arrangements,
                         std::size_t n) {
  Sequence x;
  x.reserve(n);
  auto len = static_cast<unsigned>(n);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::uint32_t j = 0; j < remaining.size(); ++j) {
      if (remaining[j] == 0) continue;
      BigInt block = arrangements * remaining[j] / len;
      if (rank < block) {
        x.push_back(j);
        arrangements = block;
        --remaining[j];
        break;
      }
      rank -= block;
    }
    --len;
  }
  return x;
}

Sequence draw_block(const CategoricalSampler& sampler, std::size_t n, RandomStream& stream) {
  Sequence x(n);
  for (auto& s : x) s = static_cast<std::uint32_t>(sampler(stream));
  return x;
}

}  // namespace

void SourceModel::validate() const {
  if (n < 1) throw InvalidArgument("block length must be at least 1");
  if (!p.on_simplex()) throw InvalidArgument("source distribution must lie on the simplex");
}

double log2_big(const BigInt& x) {
  if (x <= 0) return x == 0 ? -kInf : std::numeric_limits<double>::quiet_NaN();
  const auto top = boost::multiprecision::msb(x);
  if (top <= 52) return std::log2(x.convert_to<double>());
  const auto shift = static_cast<unsigned>(top - 52);
  const BigInt head = x >> shift;
  return std::log2(head.convert_to<double>()) + static_cast<double>(shift);
}

double seq_log2prob(std::span<const std::uint32_t> x, const ProbVector& p) {
  if (x.empty()) throw InvalidArgument("sequence must be nonempty");
  double total = 0.0;
  for (auto s : x) {
    if (s >= p.size()) throw InvalidArgument("symbol outside the alphabet");
    if (p[s] == 0.0) return -kInf;
    total += std::log2(p[s]);
  }
  return total;
}

double typicality_statistic(std::span<const std::uint32_t> counts, const ProbVector& p) {
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  if (n == 0) throw InvalidArgument("sequence must be nonempty");
  const double lp = type_log2prob(counts, p);
  if (!std::isfinite(lp)) return kInf;
  return -lp / static_cast<double>(n) - entropy(p, LogBase::bits);
}

bool is_typical(std::span<const std::uint32_t> x, const ProbVector& p, double epsilon,
                Typicality variant) {
  check_epsilon(epsilon);
  if (x.empty()) throw InvalidArgument("sequence must be nonempty");
  return passes(typicality_statistic(occupation(x, p.size()), p), epsilon, variant);
}

double TypeClass::mass() const {
  if (!std::isfinite(per_seq_log2prob)) return 0.0;
  return std::exp2(log2_multiplicity + per_seq_log2prob);
}

std::size_t type_count(std::size_t K, std::size_t n, std::size_t max) {
  // C(n + K - 1, K - 1) built incrementally as C(n + j, j); each step is exact.
  const std::size_t cap = max + 1;
  unsigned __int128 c = 1;
  for (std::size_t j = 1; j < K; ++j) {
    c = c * (n + j) / j;
    if (c > cap) return cap;
  }
  return static_cast<std::size_t>(c);
}

std::vector<TypeClass> type_census(const SourceModel& model, std::size_t max_types) {
  model.validate();
  const std::size_t K = model.K();
  const std::size_t n = model.n;
  const std::size_t count = type_count(K, n, max_types);
  if (count > max_types) {
    throw CensusTooLarge("census of K=" + std::to_string(K) + ", n=" + std::to_string(n) +
                         " exceeds " + std::to_string(max_types) + " types");
  }
  const auto fact = factorials(n);
  std::vector<TypeClass> census;
  census.reserve(count);
  std::vector<std::uint32_t> counts(K, 0);

  auto emit = [&] {
    TypeClass t;
    t.counts = counts;
    t.per_seq_log2prob = type_log2prob(counts, model.p);
    BigInt denom = 1;
    for (auto c : counts) denom *= fact[c];
    t.multiplicity = fact[n] / denom;
    t.log2_multiplicity = log2_big(t.multiplicity);
    census.push_back(std::move(t));
  };
  // Depth-first over c_0, c_1, ... with the last coordinate taking the rest.
  auto fill = [&](auto&& self, std::size_t pos, std::size_t left) -> void {
    if (pos + 1 == K) {
      counts[pos] = static_cast<std::uint32_t>(left);
      emit();
      return;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      counts[pos] = static_cast<std::uint32_t>(c);
      self(self, pos + 1, left - c);
    }
  };
  fill(fill, 0, n);
  return census;
}

void write_census_csv(std::ostream& out, const std::vector<TypeClass>& census) {
  out << "counts,log2prob,multiplicity\n";
  char buf[32];
  for (const auto& t : census) {
    for (std::size_t k = 0; k < t.counts.size(); ++k) {
      if (k) out << ' ';
      out << t.counts[k];
    }
    std::snprintf(buf, sizeof buf, "%.17g", t.per_seq_log2prob);
    out << ',' << buf << ',' << t.multiplicity.str() << '\n';
  }
}

TypicalSetStats typical_set_stats(const SourceModel& model, double epsilon, Typicality variant) {
  check_epsilon(epsilon);
  const auto census = type_census(model);
  const double h = entropy(model.p, LogBase::bits);
  TypicalSetStats s;
  s.variant = variant;
  s.epsilon = epsilon;
  s.size = 0;
  for (const auto& t : census) {
    if (!passes(typicality_statistic(t.counts, model.p), epsilon, variant)) continue;
    s.size += t.multiplicity;
    s.prob_mass += t.mass();
  }
  s.prob_mass = std::min(s.prob_mass, 1.0);
  s.log2_size = log2_big(s.size);
  if (variant != Typicality::t2) {
    s.counting_bound_holds = s.log2_size < static_cast<double>(model.n) * (h + epsilon);
  }
  return s;
}

EssentialBitContent essential_bit_content(const SourceModel& model, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  auto census = type_census(model);
  std::erase_if(census, [](const TypeClass& t) { return !std::isfinite(t.per_seq_log2prob); });
  std::stable_sort(census.begin(), census.end(), [](const TypeClass& a, const TypeClass& b) {
    return a.per_seq_log2prob > b.per_seq_log2prob;
  });

  const double target = 1.0 - delta;
  EssentialBitContent e;
  e.delta = delta;
  e.set_size = 0;
  for (const auto& t : census) {
    const double seq_prob = std::exp2(t.per_seq_log2prob);
    const double type_mass = t.mass();
    e.min_seq_prob = seq_prob;
    if (e.mass + type_mass < target) {
      e.set_size += t.multiplicity;
      e.mass += type_mass;
      continue;
    }
    const double need = std::ceil((target - e.mass) / seq_prob - 1e-9);
    BigInt take = static_cast<std::uint64_t>(std::max(need, 1.0));
    if (take > t.multiplicity) take = t.multiplicity;
    e.set_size += take;
    e.mass += take.convert_to<double>() * seq_prob;
    break;
  }
  e.mass = std::min(e.mass, 1.0);
  e.h_delta = log2_big(e.set_size);
  return e;
}

SourceCodingThresholds source_coding_thresholds(std::size_t K, double delta, double epsilon) {
  check_epsilon(epsilon);
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  const double l2 = padded_log2(K);
  const double eps2 = epsilon * epsilon;
  SourceCodingThresholds t;
  t.n_upper = 4.0 * l2 * l2 * std::log(1.0 / delta) / eps2;
  const double tail = 2.0 / (1.0 - delta);
  t.n_lower = std::max(2.0 * std::log2(tail) / epsilon, 16.0 * l2 * l2 * std::log(tail) / eps2);
  return t;
}

bool SourceCodingReport::passed() const noexcept {
  return std::all_of(rows.begin(), rows.end(), [](const SourceCodingRow& r) {
    return (!r.upper_checked || r.upper_holds) && (!r.lower_checked || r.lower_holds);
  });
}

SourceCodingReport verify_source_coding(const ProbVector& p, double delta, double epsilon,
                                        std::size_t n_first, std::size_t n_last) {
  if (n_first < 1 || n_last < n_first) throw InvalidArgument("invalid block-length range");
  SourceCodingReport report;
  report.thresholds = source_coding_thresholds(p.size(), delta, epsilon);
  const double h = entropy(p, LogBase::bits);
  for (std::size_t n = n_first; n <= n_last; ++n) {
    const auto e = essential_bit_content(SourceModel{p, n}, delta);
    SourceCodingRow row;
    row.n = n;
    row.entropy = h;
    row.rate = e.h_delta / static_cast<double>(n);
    row.upper_margin = h + epsilon - row.rate;
    row.lower_margin = row.rate - (h - epsilon);
    row.upper_checked = static_cast<double>(n) > report.thresholds.n_upper;
    row.lower_checked = static_cast<double>(n) > report.thresholds.n_lower;
    row.upper_holds = row.upper_margin > 0.0;
    row.lower_holds = row.lower_margin > 0.0;
    report.rows.push_back(row);
  }
  return report;
}

BlockCode::BlockCode(SourceModel model, double epsilon)
    : model_(std::move(model)), epsilon_(epsilon) {
  check_epsilon(epsilon);
  model_.validate();
  const auto n = static_cast<double>(model_.n);
  const double h = entropy(model_.p, LogBase::bits);
  const double m = std::ceil(n * (h + epsilon));
  const double raw = std::ceil(n * std::log2(static_cast<double>(model_.K())));
  if (m >= raw) {
    throw VacuousCode("codeword length " + std::to_string(static_cast<long long>(m)) +
                      " is not shorter than the raw length " +
                      std::to_string(static_cast<long long>(raw)));
  }
  bits_ = static_cast<std::size_t>(m);

  typical_count_ = 0;
  for (auto& t : type_census(model_)) {
    if (!passes(typicality_statistic(t.counts, model_.p), epsilon, Typicality::t1)) continue;
    typical_mass_ += t.mass();
    types_.push_back({std::move(t.counts), typical_count_, t.multiplicity});
    typical_count_ += t.multiplicity;
  }
  typical_mass_ = std::min(typical_mass_, 1.0);
  if (typical_count_ == 0) throw VacuousCode("the typical set is empty");
  // Index 0 is reserved for the fallback, so |T1| must stay below 2^m.
  if (boost::multiprecision::msb(typical_count_) >= bits_) {
    throw VacuousCode("typical set does not fit in " + std::to_string(bits_) + " bits");
  }
}

std::optional<std::size_t> BlockCode::find_type(std::span<const std::uint32_t> counts) const {
  auto it = std::lower_bound(types_.begin(), types_.end(), counts,
                             [](const TypicalType& t, std::span<const std::uint32_t> c) {
                               return std::lexicographical_compare(t.counts.begin(), t.counts.end(),
                                                                   c.begin(), c.end());
                             });
  if (it == types_.end() || !std::equal(it->counts.begin(), it->counts.end(), counts.begin(), counts.end())) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - types_.begin());
}

bool BlockCode::typical(std::span<const std::uint32_t> x) const {
  if (x.size() != model_.n) throw InvalidArgument("block has the wrong length");
  return find_type(occupation(x, model_.K())).has_value();
}

BigInt BlockCode::index(std::span<const std::uint32_t> x) const {
  if (x.size() != model_.n) throw InvalidArgument("block has the wrong length");
  auto counts = occupation(x, model_.K());
  const auto slot = find_type(counts);
  if (!slot) return 0;
  const auto& t = types_[*slot];
  return 1 + t.offset + multiset_rank(x, std::move(counts), t.multiplicity);
}

Sequence BlockCode::sequence(const BigInt& index) const {
  BigInt i = (index < 1 || index > typical_count_) ? BigInt(0) : BigInt(index - 1);
  auto it = std::upper_bound(types_.begin(), types_.end(), i,
                             [](const BigInt& v, const TypicalType& t) { return v < t.offset; });
  const auto& t = *std::prev(it);
  return multiset_unrank(i - t.offset, t.counts, t.multiplicity, model_.n);
}

std::vector<std::uint8_t> BlockCode::encode(std::span<const std::uint32_t> x) const {
  return pack_bits(index(x), bits_);
}

Sequence BlockCode::decode(std::span<const std::uint8_t> codeword) const {
  return sequence(unpack_bits(codeword, bits_));
}

BlockCode build_block_code(const SourceModel& model, double epsilon) {
  return BlockCode(model, epsilon);
}

std::vector<std::uint8_t> pack_bits(const BigInt& value, std::size_t bits) {
  if (value < 0 || (value != 0 && boost::multiprecision::msb(value) >= bits)) {
    throw InvalidArgument("value does not fit in " + std::to_string(bits) + " bits");
  }
  std::vector<std::uint8_t> out((bits + 7) / 8, 0);
  for (std::size_t i = 0; i < bits; ++i) {
    if (boost::multiprecision::bit_test(value, static_cast<unsigned>(bits - 1 - i))) {
      out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    }
  }
  return out;
}

BigInt unpack_bits(std::span<const std::uint8_t> bytes, std::size_t bits) {
  if (bytes.size() != (bits + 7) / 8) throw InvalidArgument("codeword has the wrong length");
  BigInt v = 0;
  for (std::size_t i = 0; i < bits; ++i) {
    v <<= 1;
    if (bytes[i / 8] & (0x80u >> (i % 8))) v |= 1;
  }
  return v;
}

CodeErrorReport code_error(const BlockCode& code, std::size_t replicates, std::uint64_t seed,
                           std::size_t workers) {
  if (replicates < 1) throw InvalidArgument("replicates must be at least 1");
  const auto& model = code.model();
  const CategoricalSampler sampler(model.p);
  std::vector<std::uint8_t> failed(replicates, 0);

  auto run = [&](std::size_t first, std::size_t stride) {
    for (std::size_t r = first; r < replicates; r += stride) {
      RandomStream stream(seed, StreamPurpose::coding, r);
      const auto x = draw_block(sampler, model.n, stream);
      failed[r] = code.decode(code.encode(x)) != x;
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, replicates);
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
    for (auto& t : pool) t.join();
  }

  CodeErrorReport r;
  r.replicates = replicates;
  for (auto f : failed) r.failures += f;
  r.mc_error = static_cast<double>(r.failures) / static_cast<double>(replicates);
  r.ci_halfwidth = entconc::ci_halfwidth(r.mc_error, replicates);
  r.exact_error = std::max(0.0, 1.0 - code.typical_mass());
  r.bound = coding_error_bound(model.K(), model.n, code.epsilon());
  r.mc_matches_exact = std::abs(r.mc_error - r.exact_error) <= r.ci_halfwidth;
  r.exact_within_bound = r.exact_error <= r.bound;
  r.mc_within_bound = r.mc_error <= r.bound + r.ci_halfwidth;
  return r;
}

RoundtripReport sampled_roundtrip(const BlockCode& code, std::size_t samples, std::uint64_t seed) {
  const auto& model = code.model();
  const CategoricalSampler sampler(model.p);
  RoundtripReport r;
  const std::size_t max_draws = samples * 1000;
  while (r.checked < samples && r.draws < max_draws) {
    RandomStream stream(seed, StreamPurpose::coding, r.draws++);
    const auto x = draw_block(sampler, model.n, stream);
    if (!code.typical(x)) continue;
    ++r.checked;
    if (code.decode(code.encode(x)) != x) ++r.failures;
  }
  return r;
}

RoundtripReport exhaustive_roundtrip(const BlockCode& code) {
  const auto& model = code.model();
  const double total = std::pow(static_cast<double>(model.K()), static_cast<double>(model.n));
  if (total > 1e6) throw CensusTooLarge("exhaustive roundtrip needs K^n <= 10^6");
  RoundtripReport r;
  Sequence x(model.n, 0);
  const auto k = static_cast<std::uint32_t>(model.K());
  while (true) {
    ++r.draws;
    if (std::isfinite(seq_log2prob(x, model.p)) && code.typical(x)) {
      ++r.checked;
      if (code.decode(code.encode(x)) != x) ++r.failures;
    }
    std::size_t pos = model.n;
    while (pos > 0 && ++x[pos - 1] == k) x[--pos] = 0;
    if (pos == 0) break;
  }
  return r;
}

ProbVector tilted(const ProbVector& p, double beta) {
  double top = -kInf;
  for (double v : p) {
    if (v > 0.0) top = std::max(top, beta * std::log(v));
  }
  std::vector<double> q(p.size(), 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) sum += q[k] = std::exp(beta * std::log(p[k]) - top);
  }
  for (auto& v : q) v /= sum;
  return ProbVector(std::move(q));
}

double kl_divergence(const ProbVector& q, const ProbVector& p) {
  if (q.size() != p.size()) throw InvalidArgument("alphabet sizes differ");
  double d = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (q[k] == 0.0) continue;
    if (p[k] == 0.0) return kInf;
    d += q[k] * std::log(q[k] / p[k]);
  }
  return std::max(d, 0.0);
}

ErrorExponentResult error_exponent(const ProbVector& p, double epsilon) {
  check_epsilon(epsilon);
  ErrorExponentResult r;
  r.epsilon = epsilon;
  r.target_entropy = entropy(p, LogBase::bits) + epsilon;
  auto gap = [&](double beta) { return entropy(tilted(p, beta), LogBase::bits) - r.target_entropy; };
  if (gap(0.0) < 0.0) {
    r.divergence = kInf;
    return r;
  }
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) >= 0.0 ? lo : hi) = mid;
  }
  r.feasible = true;
  r.tilt = lo;
  r.q_opt = tilted(p, lo);
  r.divergence = kl_divergence(*r.q_opt, p);
  return r;
}

double classical_error_bound(const ProbVector& p, double epsilon, std::size_t n) {
  if (n < 1) throw InvalidArgument("n must be at least 1");
  const double d = error_exponent(p, epsilon).divergence;
  const auto nn = static_cast<double>(n);
  return std::exp(-nn * d + static_cast<double>(p.size()) * std::log(nn + 1.0));
}

double coding_error_bound(std::size_t K, std::size_t n, double epsilon) {
  const double l2 = padded_log2(K);
  return std::exp(-static_cast<double>(n) * epsilon * epsilon / (4.0 * l2 * l2));
}

std::optional<std::size_t> exponent_crossover(double divergence, std::size_t K, double epsilon) {
  const double l2 = padded_log2(K);
  const double rate = divergence - epsilon * epsilon / (4.0 * l2 * l2);
  if (!(rate > 0.0)) return std::nullopt;
  if (std::isinf(rate)) return 1;
  // n * rate - K log(n + 1) is convex and zero at n = 0, so its positive set
  // is a half-line.
  const auto kk = static_cast<double>(K);
  auto wins = [&](std::size_t n) {
    const auto nn = static_cast<double>(n);
    return nn * rate > kk * std::log(nn + 1.0);
  };
  std::size_t hi = 1;
  while (!wins(hi)) {
    if (hi > (std::size_t{1} << 62)) return std::nullopt;
    hi *= 2;
  }
  std::size_t lo = hi / 2;  // lo fails or is 0
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (wins(mid) ? hi : lo) = mid;
  }
  return hi;
}

ExponentComparison compare_exponents(const ProbVector& p, double epsilon,
                                     const std::vector<std::size_t>& ns,
                                     const std::vector<std::size_t>& Ks) {
  const double d = error_exponent(p, epsilon).divergence;
  ExponentComparison cmp;
  cmp.epsilon = epsilon;
  for (std::size_t K : Ks) {
    if (K < p.size()) throw InvalidArgument("K must be at least the support size of p");
    for (std::size_t n : ns) {
      if (n < 1) throw InvalidArgument("n must be at least 1");
      ExponentRow row;
      row.n = n;
      row.K = K;
      row.divergence = d;
      const auto nn = static_cast<double>(n);
      row.classical = std::exp(-nn * d + static_cast<double>(K) * std::log(nn + 1.0));
      row.block_code_bound = coding_error_bound(K, n, epsilon);
      row.classical_vacuous = row.classical >= 1.0;
      cmp.rows.push_back(row);
    }
    cmp.crossovers.emplace_back(K, exponent_crossover(d, K, epsilon));
  }
  return cmp;
}

}  // namespace entconc
