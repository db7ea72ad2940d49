#include "wcga/analysis.hpp"

#include "parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace wcga {

namespace {

constexpr double kSingularLimit = 1e12;
constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // acc * (n - k + i) is divisible by i; saturate before it can overflow.
    if (acc > kSaturated / (n - k + i)) return kSaturated;
    acc = acc * (n - k + i) / i;
  }
  return acc;
}

std::uint64_t add_sat(std::uint64_t a, std::uint64_t b) { return a > kSaturated - b ? kSaturated : a + b; }
std::uint64_t mul_sat(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  return a > kSaturated / b ? kSaturated : a * b;
}

// Lexicographic k-combination of {0..n-1} with the given rank.
std::vector<std::size_t> unrank(std::uint64_t rank, std::size_t n, std::size_t k) {
  std::vector<std::size_t> out;
  out.reserve(k);
  std::size_t next = 0;
  for (std::size_t pos = 0; pos < k; ++pos) {
    for (std::size_t v = next; v < n; ++v) {
      const std::uint64_t block = binomial(n - v - 1, k - pos - 1);
      if (rank < block) {
        out.push_back(v);
        next = v + 1;
        break;
      }
      rank -= block;
    }
  }
  return out;
}

struct Candidate {
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;  // a followed by the completion
};

// A ranges over subsets of `pool` with k_min <= |A| <= k_max; B = A plus a
// completion from the rest of the dictionary up to min(completion_to, n)
// elements (no completion when completion_to <= |A|).
class CandidateSpace {
 public:
  CandidateSpace(std::size_t n, std::vector<std::size_t> pool, int k_min, int k_max, int completion_to)
      : n_(n), pool_(std::move(pool)), k_min_(k_min), k_max_(k_max) {
    target_ = static_cast<std::size_t>(std::max(0, completion_to));
    target_ = std::min(target_, n_);
    for (int k = k_min_; k <= k_max_; ++k) {
      const auto kk = static_cast<std::uint64_t>(k);
      const std::uint64_t per_a = binomial(n_ - kk, completion(k));
      blocks_.push_back(mul_sat(binomial(pool_.size(), kk), per_a));
      per_a_.push_back(per_a);
      total_ = add_sat(total_, blocks_.back());
    }
  }

  std::uint64_t count() const { return total_; }

  Candidate at(std::uint64_t index) const {
    for (int k = k_min_; k <= k_max_; ++k) {
      const auto slot = static_cast<std::size_t>(k - k_min_);
      if (index >= blocks_[slot]) {
        index -= blocks_[slot];
        continue;
      }
      const std::uint64_t a_rank = index / per_a_[slot];
      const std::uint64_t l_rank = index % per_a_[slot];
      Candidate c;
      for (std::size_t pos : unrank(a_rank, pool_.size(), static_cast<std::size_t>(k))) c.a.push_back(pool_[pos]);
      std::sort(c.a.begin(), c.a.end());
      const auto rest = complement(c.a);
      c.b = c.a;
      for (std::size_t pos : unrank(l_rank, rest.size(), completion(k))) c.b.push_back(rest[pos]);
      return c;
    }
    throw std::out_of_range("candidate index");
  }

  Candidate sample(std::mt19937_64& rng) const {
    std::uniform_int_distribution<int> size_dist(k_min_, std::min<int>(k_max_, static_cast<int>(pool_.size())));
    const int k = size_dist(rng);
    Candidate c;
    c.a = draw(pool_, static_cast<std::size_t>(k), rng);
    const auto rest = complement(c.a);
    c.b = c.a;
    for (std::size_t v : draw(rest, completion(k), rng)) c.b.push_back(v);
    return c;
  }

 private:
  std::size_t completion(int k) const {
    const auto kk = static_cast<std::size_t>(k);
    return target_ > kk ? target_ - kk : 0;
  }

  std::vector<std::size_t> complement(const std::vector<std::size_t>& sorted_a) const {
    std::vector<std::size_t> rest;
    rest.reserve(n_ - sorted_a.size());
    std::size_t j = 0;
    for (std::size_t v = 0; v < n_; ++v) {
      if (j < sorted_a.size() && sorted_a[j] == v) {
        ++j;
      } else {
        rest.push_back(v);
      }
    }
    return rest;
  }

  static std::vector<std::size_t> draw(std::vector<std::size_t> from, std::size_t k, std::mt19937_64& rng) {
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, from.size() - 1);
      std::swap(from[i], from[pick(rng)]);
    }
    from.resize(k);
    std::sort(from.begin(), from.end());
    return from;
  }

  std::size_t n_;
  std::vector<std::size_t> pool_;
  int k_min_;
  int k_max_;
  std::size_t target_ = 0;
  std::vector<std::uint64_t> blocks_;
  std::vector<std::uint64_t> per_a_;
  std::uint64_t total_ = 0;
};

struct CandidateResult {
  double value = -1.0;
  bool exact = true;
  Witness witness;
};

Eigen::VectorXd synth(const Dictionary& dict, const std::vector<std::size_t>& idx,
                      const Eigen::VectorXd& coef) {
  return dict.columns(idx) * coef;
}

double norm_of(const Dictionary& dict, const Eigen::VectorXd& v, double p) {
  return lp_norm(v, dict.grid().weight(), p);
}

double a_power(std::size_t a_size, double r) { return std::pow(static_cast<double>(a_size), r); }

// sum_A |c| / (|A|^r ||sum_B c g||), A = first |subset_a| entries of subset_b.
double l1_ratio(const Dictionary& dict, const Witness& w, double r, double p) {
  const double denom = norm_of(dict, synth(dict, w.subset_b, w.coefficients), p);
  const double l1 = w.coefficients.head(static_cast<Eigen::Index>(w.subset_a.size())).cwiseAbs().sum();
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return l1 / (a_power(w.subset_a.size(), r) * denom);
}

double u_ratio(const Dictionary& dict, const Witness& w, double p) {
  const auto na = static_cast<Eigen::Index>(w.subset_a.size());
  const double num = norm_of(dict, synth(dict, w.subset_a, w.coefficients.head(na)), p);
  const double denom = norm_of(dict, synth(dict, w.subset_b, w.coefficients), p);
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return num / denom;
}

Eigen::MatrixXd checked_gram(const Dictionary& dict, const std::vector<std::size_t>& idx) {
  const Eigen::MatrixXd cols = dict.columns(idx);
  const double cond = gram_condition(cols, dict.grid().weight());
  if (!(cond <= kSingularLimit)) {
    std::string list;
    for (auto i : idx) list += (list.empty() ? "" : ",") + std::to_string(i);
    throw SingularGram("Gram submatrix on {" + list + "} is singular (condition " +
                       std::to_string(cond) + ")");
  }
  return gram(dict, idx);
}

// Sign patterns with the first entry fixed to +1 (the ratio is even in c).
std::vector<Eigen::VectorXd> sign_patterns(std::size_t k) {
  std::vector<Eigen::VectorXd> out;
  if (k == 0) return out;
  const std::size_t count = std::size_t{1} << (k - 1);
  for (std::size_t mask = 0; mask < count; ++mask) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(k));
    s[0] = 1.0;
    for (std::size_t i = 1; i < k; ++i) s[static_cast<Eigen::Index>(i)] = (mask >> (i - 1)) & 1 ? -1.0 : 1.0;
    out.push_back(std::move(s));
  }
  return out;
}

// sup over c_B of s . c_A / ||sum_B c g|| for p = 2: sqrt(s' (G_B^{-1})_AA s),
// attained at c = G_B^{-1} [s; 0].
CandidateResult l1_sup_hilbert(const Dictionary& dict, const Candidate& cand, double r, double p) {
  const Eigen::MatrixXd g = checked_gram(dict, cand.b);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
  const auto na = static_cast<Eigen::Index>(cand.a.size());
  CandidateResult best;
  for (const auto& s : sign_patterns(cand.a.size())) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(g.rows());
    rhs.head(na) = s;
    Witness w{cand.a, cand.b, ldlt.solve(rhs)};
    const double v = l1_ratio(dict, w, r, p);
    if (v > best.value) {
      best.value = v;
      best.witness = std::move(w);
    }
  }
  return best;
}

// Same supremum for any p through the dual problem: for a fixed sign
// pattern s, sup s . c_A / ||f|| = 1 / min{ ||f|| : s . c_A = 1 }. With
// c_a0 = 1 - sum_{i in A, i != a0} s_i c_i the constraint disappears and the
// minimum is the distance from g_a0 to span{g_i - s_i g_a0} + span(Lambda).
CandidateResult l1_sup_dual(const Dictionary& dict, const Candidate& cand, double r, double p,
                            const ProjectionOptions& popts) {
  const std::size_t na = cand.a.size();
  const std::size_t nb = cand.b.size();
  const SampledFunction target = dict.element(cand.a[0]);
  const auto g0 = dict.column(cand.a[0]);
  CandidateResult best;
  for (const auto& s : sign_patterns(na)) {
    Eigen::MatrixXd span(g0.size(), static_cast<Eigen::Index>(nb - 1));
    for (std::size_t i = 1; i < nb; ++i) {
      const auto col = dict.column(cand.b[i]);
      span.col(static_cast<Eigen::Index>(i - 1)) =
          i < na ? Eigen::VectorXd(col - s[static_cast<Eigen::Index>(i)] * g0) : Eigen::VectorXd(col);
    }
    Projection proj;
    try {
      proj = project_best(target, span, p, popts);
    } catch (const NumericallyDependentSpan& e) {
      throw SingularGram(std::string("dual span is singular: ") + e.what());
    }
    // f = g_a0 - sum_j proj_j span_j, expressed on the original elements.
    Eigen::VectorXd coef(static_cast<Eigen::Index>(nb));
    coef[0] = 1.0;
    for (std::size_t i = 1; i < nb; ++i) {
      const double cj = proj.coefficients[static_cast<Eigen::Index>(i - 1)];
      coef[static_cast<Eigen::Index>(i)] = -cj;
      if (i < na) coef[0] += cj * s[static_cast<Eigen::Index>(i)];
    }
    Witness w{cand.a, cand.b, std::move(coef)};
    const double v = l1_ratio(dict, w, r, p);
    if (v > best.value) {
      best.value = v;
      best.witness = std::move(w);
    }
    best.exact = best.exact && proj.converged;
  }
  return best;
}

// Coefficients on Lambda minimizing ||f_A + sum_Lambda c g||_p for fixed c_A.
Eigen::VectorXd best_completion(const Dictionary& dict, const Candidate& cand,
                                const Eigen::VectorXd& ca, double p, const ProjectionOptions& popts,
                                bool* converged) {
  const std::vector<std::size_t> lambda(cand.b.begin() + static_cast<std::ptrdiff_t>(cand.a.size()),
                                        cand.b.end());
  SampledFunction fa(dict.grid_ptr(), synth(dict, cand.a, ca));
  Projection proj;
  try {
    proj = project_best(fa, dict, lambda, p, popts);
  } catch (const NumericallyDependentSpan& e) {
    throw SingularGram(std::string("completion span is singular: ") + e.what());
  }
  if (converged) *converged = proj.converged;
  return -proj.coefficients;
}

// U for one (A, B) at p = 2: the largest generalized eigenvalue of G_AA
// against the Schur complement S = G_AA - G_AL G_LL^{-1} G_LA.
CandidateResult u_sup_hilbert(const Dictionary& dict, const Candidate& cand, double p) {
  const auto na = static_cast<Eigen::Index>(cand.a.size());
  const auto nl = static_cast<Eigen::Index>(cand.b.size()) - na;
  const Eigen::MatrixXd g = checked_gram(dict, cand.b);
  CandidateResult out;
  if (nl == 0) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(na);
    c[0] = 1.0;
    out.witness = Witness{cand.a, cand.b, c};
    out.value = u_ratio(dict, out.witness, p);
    return out;
  }
  const Eigen::MatrixXd gaa = g.topLeftCorner(na, na);
  const Eigen::MatrixXd gal = g.topRightCorner(na, nl);
  const Eigen::MatrixXd gll = g.bottomRightCorner(nl, nl);
  const Eigen::LDLT<Eigen::MatrixXd> lll(gll);
  Eigen::MatrixXd schur = gaa - gal * lll.solve(gal.transpose());
  schur = 0.5 * (schur + schur.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(gaa, schur);
  if (ges.info() != Eigen::Success) throw SingularGram("generalized eigenproblem failed");
  const Eigen::VectorXd ca = ges.eigenvectors().col(na - 1);
  Eigen::VectorXd coef(na + nl);
  coef.head(na) = ca;
  coef.tail(nl) = -lll.solve(gal.transpose() * ca);
  out.witness = Witness{cand.a, cand.b, coef};
  out.value = u_ratio(dict, out.witness, p);
  return out;
}

// U for one (A, B) at p != 2: multi-start random local ascent over the
// direction of c_A; each evaluation solves the inner convex completion.
CandidateResult u_sup_ascent(const Dictionary& dict, const Candidate& cand, double p, int starts,
                             std::uint64_t seed, const ProjectionOptions& popts) {
  const auto na = static_cast<Eigen::Index>(cand.a.size());
  const auto nl = static_cast<Eigen::Index>(cand.b.size()) - na;
  CandidateResult best;
  auto evaluate = [&](const Eigen::VectorXd& ca) {
    bool converged = true;
    Eigen::VectorXd coef(na + nl);
    coef.head(na) = ca;
    if (nl > 0) coef.tail(nl) = best_completion(dict, cand, ca, p, popts, &converged);
    Witness w{cand.a, cand.b, std::move(coef)};
    const double v = u_ratio(dict, w, p);
    return std::make_pair(v, std::move(w));
  };

  if (nl == 0 || na == 1) {
    // The ratio does not depend on c_A: exact in one evaluation.
    Eigen::VectorXd ca = Eigen::VectorXd::Ones(na);
    auto [v, w] = evaluate(ca);
    best.value = v;
    best.witness = std::move(w);
    return best;
  }

  best.exact = false;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> inits;
  inits.push_back(u_sup_hilbert(dict, cand, 2.0).witness.coefficients.head(na));
  while (static_cast<int>(inits.size()) < std::max(1, starts)) {
    Eigen::VectorXd ca(na);
    for (Eigen::Index i = 0; i < na; ++i) ca[i] = normal(rng);
    inits.push_back(ca);
  }
  for (auto& ca : inits) {
    ca.normalize();
    auto [val, w] = evaluate(ca);
    double step = 0.5;
    int failures = 0;
    for (int it = 0; it < 80 && step > 1e-6; ++it) {
      Eigen::VectorXd trial = ca;
      for (Eigen::Index i = 0; i < na; ++i) trial[i] += step * normal(rng);
      trial.normalize();
      auto [tv, tw] = evaluate(trial);
      if (tv > val) {
        val = tv;
        w = std::move(tw);
        ca = trial;
        failures = 0;
      } else if (++failures >= 4) {
        step *= 0.5;
        failures = 0;
      }
    }
    if (val > best.value) {
      best.value = val;
      best.witness = std::move(w);
    }
  }
  return best;
}

CandidateResult rip_candidate(const Dictionary& dict, const Candidate& cand) {
  const Eigen::MatrixXd g = gram(dict, cand.a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const Eigen::Index k = g.rows();
  const double low = 1.0 - es.eigenvalues()[0];
  const double high = es.eigenvalues()[k - 1] - 1.0;
  CandidateResult out;
  out.witness = Witness{cand.a, cand.a, low >= high ? es.eigenvectors().col(0) : es.eigenvectors().col(k - 1)};
  ConditionEstimate probe;
  probe.kind = ConditionKind::RIP_delta;
  probe.witness = out.witness;
  out.value = evaluate_witness(dict, probe);
  return out;
}

template <class Eval>
ConditionEstimate run_estimate(ConditionKind kind, const CandidateSpace& space,
                               const EstimateOptions& options, Eval&& eval) {
  ConditionEstimate est;
  est.kind = kind;
  const bool exhaustive = space.count() <= options.budget;
  est.method = exhaustive ? "exhaustive" : "sampled";

  std::vector<Candidate> sampled;
  std::size_t count = 0;
  if (exhaustive) {
    count = static_cast<std::size_t>(space.count());
  } else {
    std::mt19937_64 rng(options.seed);
    sampled.reserve(options.samples);
    for (std::size_t i = 0; i < options.samples; ++i) sampled.push_back(space.sample(rng));
    count = sampled.size();
  }
  est.candidates = count;

  const unsigned threads = detail::resolve_threads(options.threads);
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(count, threads * 4));
  struct Best {
    double value = -1.0;
    std::size_t index = 0;
    bool all_exact = true;
    Witness witness;
  };
  std::vector<Best> partial(chunks);
  detail::for_each_chunk(count, threads, chunks, [&](std::size_t c, std::size_t begin, std::size_t end) {
    Best& b = partial[c];
    for (std::size_t i = begin; i < end; ++i) {
      const Candidate cand = exhaustive ? space.at(i) : sampled[i];
      CandidateResult res = eval(cand, i);
      b.all_exact = b.all_exact && res.exact;
      if (res.value > b.value) {
        b.value = res.value;
        b.index = i;
        b.witness = std::move(res.witness);
      }
    }
  });

  Best merged;
  for (auto& b : partial) {
    merged.all_exact = merged.all_exact && b.all_exact;
    if (b.value > merged.value || (b.value == merged.value && b.index < merged.index)) {
      merged.value = b.value;
      merged.index = b.index;
      merged.witness = std::move(b.witness);
    }
  }
  est.witness = std::move(merged.witness);
  est.exact = exhaustive && merged.all_exact;
  est.value = std::max(0.0, merged.value);
  return est;
}

std::vector<std::size_t> candidate_pool(const Dictionary& dict, const EstimateOptions& options) {
  std::vector<std::size_t> pool;
  if (options.support) {
    pool = *options.support;
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    for (auto i : pool) {
      if (i >= dict.size()) throw std::invalid_argument("support index out of range");
    }
  } else {
    pool.resize(dict.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
  }
  return pool;
}

void check_kd(const Dictionary& dict, int K, int D) {
  if (K < 1) throw std::invalid_argument("K must be positive");
  if (static_cast<std::size_t>(K) > dict.size()) throw std::invalid_argument("K exceeds dictionary size");
  if (D < K) throw std::invalid_argument("D must be at least K");
}

void check_r(double r) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("r must lie in (0, 1]");
}

}  // namespace

std::string to_string(ConditionKind kind) {
  switch (kind) {
    case ConditionKind::Nikolskii_C1: return "C1";
    case ConditionKind::Unconditionality_U: return "U";
    case ConditionKind::L1Incoherence_V: return "V";
    case ConditionKind::RIP_delta: return "delta";
  }
  return "unknown";
}

ConditionKind condition_kind_from_string(const std::string& s) {
  for (auto k : {ConditionKind::Nikolskii_C1, ConditionKind::Unconditionality_U,
                 ConditionKind::L1Incoherence_V, ConditionKind::RIP_delta}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown condition kind '" + s + "'");
}

std::uint64_t candidate_count(std::size_t dict_size, std::size_t pool_size, int k_min, int k_max,
                              int completion_to) {
  std::vector<std::size_t> pool(pool_size);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  return CandidateSpace(dict_size, pool, k_min, k_max, completion_to).count();
}

double evaluate_witness(const Dictionary& dict, const ConditionEstimate& est) {
  const Witness& w = est.witness;
  if (w.subset_b.empty() || static_cast<std::size_t>(w.coefficients.size()) != w.subset_b.size()) {
    return 0.0;
  }
  switch (est.kind) {
    case ConditionKind::Nikolskii_C1:
    case ConditionKind::L1Incoherence_V:
      return l1_ratio(dict, w, est.r, est.p);
    case ConditionKind::Unconditionality_U:
      return u_ratio(dict, w, est.p);
    case ConditionKind::RIP_delta: {
      const Eigen::MatrixXd g = gram(dict, w.subset_b);
      const double a2 = w.coefficients.squaredNorm();
      return std::abs(w.coefficients.dot(g * w.coefficients) - a2) / a2;
    }
  }
  return 0.0;
}

ConditionEstimate estimate_nikolskii(const Dictionary& dict, int K, double r, double p,
                                     const EstimateOptions& options) {
  require_valid_exponent(p);
  check_kd(dict, K, K);
  check_r(r);
  const auto pool = candidate_pool(dict, options);
  const CandidateSpace space(dict.size(), pool, 1, std::min<int>(K, static_cast<int>(pool.size())), 0);
  auto est = run_estimate(ConditionKind::Nikolskii_C1, space, options,
                          [&](const Candidate& c, std::size_t) {
                            return p == 2.0 ? l1_sup_hilbert(dict, c, r, p)
                                            : l1_sup_dual(dict, c, r, p, options.projection);
                          });
  est.K = K;
  est.D = K;
  est.r = r;
  est.p = p;
  return est;
}

ConditionEstimate estimate_a3(const Dictionary& dict, int K, int D, double r, double p,
                              const EstimateOptions& options) {
  require_valid_exponent(p);
  check_kd(dict, K, D);
  check_r(r);
  const auto pool = candidate_pool(dict, options);
  const CandidateSpace space(dict.size(), pool, 1, std::min<int>(K, static_cast<int>(pool.size())), D);
  auto est = run_estimate(ConditionKind::L1Incoherence_V, space, options,
                          [&](const Candidate& c, std::size_t) {
                            return p == 2.0 ? l1_sup_hilbert(dict, c, r, p)
                                            : l1_sup_dual(dict, c, r, p, options.projection);
                          });
  est.K = K;
  est.D = D;
  est.r = r;
  est.p = p;
  return est;
}

ConditionEstimate estimate_unconditionality(const Dictionary& dict, int K, int D, double p,
                                            const EstimateOptions& options) {
  require_valid_exponent(p);
  check_kd(dict, K, D);
  const auto pool = candidate_pool(dict, options);
  const CandidateSpace space(dict.size(), pool, 1, std::min<int>(K, static_cast<int>(pool.size())), D);
  auto est = run_estimate(ConditionKind::Unconditionality_U, space, options,
                          [&](const Candidate& c, std::size_t index) {
                            return p == 2.0 ? u_sup_hilbert(dict, c, p)
                                            : u_sup_ascent(dict, c, p, options.starts,
                                                           options.seed + index, options.projection);
                          });
  est.K = K;
  est.D = D;
  est.p = p;
  return est;
}

ConditionEstimate rip_delta(const Dictionary& dict, int D, const EstimateOptions& options) {
  if (D < 1) throw std::invalid_argument("rip_delta: D must be positive");
  const int depth = std::min<int>(D, static_cast<int>(dict.size()));
  std::vector<std::size_t> all(dict.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const CandidateSpace space(dict.size(), all, depth, depth, 0);
  auto est = run_estimate(ConditionKind::RIP_delta, space, options,
                          [&](const Candidate& c, std::size_t) { return rip_candidate(dict, c); });
  est.K = depth;
  est.D = D;
  est.p = 2.0;
  return est;
}

SigmaTable sigma_m_oracle(const SampledFunction& f0, const Dictionary& dict, int m_max, double p,
                          const SigmaOptions& options) {
  require_valid_exponent(p);
  if (m_max < 0) throw std::invalid_argument("sigma_m_oracle: m_max must be nonnegative");
  if (!(f0.grid() == dict.grid())) throw std::invalid_argument("sigma_m_oracle: grid mismatch");
  const std::size_t n = dict.size();
  const auto top = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(m_max), n));

  SigmaTable table;
  table.p = p;
  table.method = options.capped ? "capped" : "exhaustive";
  table.values.push_back(lp_norm(f0, p));
  table.supports.emplace_back();

  ProjectionOptions popts = options.projection;
  popts.strict = false;
  auto project = [&](const std::vector<std::size_t>& support) {
    try {
      return project_best(f0, dict, support, p, popts).residual_norm;
    } catch (const NumericallyDependentSpan&) {
      // Same span as a smaller support, already covered.
      return std::numeric_limits<double>::infinity();
    }
  };
  const unsigned threads = detail::resolve_threads(options.threads);

  if (!options.capped) {
    std::uint64_t total = 0;
    for (std::size_t m = 0; m <= top; ++m) total = add_sat(total, binomial(n, m));
    if (total > options.combo_cap) {
      throw CapExceeded("sigma_m_oracle: " + std::to_string(total) + " subsets exceed combo_cap " +
                        std::to_string(options.combo_cap) + "; use capped mode");
    }
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (std::size_t m = 1; m <= top; ++m) {
      const CandidateSpace space(n, all, static_cast<int>(m), static_cast<int>(m), 0);
      const auto count = static_cast<std::size_t>(space.count());
      const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(count, threads * 4));
      std::vector<std::pair<double, std::size_t>> partial(
          chunks, {std::numeric_limits<double>::infinity(), 0});
      detail::for_each_chunk(count, threads, chunks, [&](std::size_t c, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          const double v = project(space.at(i).a);
          if (v < partial[c].first) partial[c] = {v, i};
        }
      });
      auto best = partial.front();
      for (const auto& b : partial) {
        if (b.first < best.first || (b.first == best.first && b.second < best.second)) best = b;
      }
      table.values.push_back(best.first);
      table.supports.push_back(space.at(best.second).a);
      table.projections += count;
    }
    return table;
  }

  // Beam search seeded with the WCGA prefixes.
  std::vector<std::vector<std::size_t>> greedy_prefixes;
  try {
    GreedyConfig cfg;
    cfg.p = p;
    cfg.max_iter = static_cast<int>(top);
    cfg.strict_projection = false;
    const auto trace = wcga_run(f0, dict, cfg);
    for (std::size_t m = 1; m <= trace.selected.size(); ++m) {
      std::vector<std::size_t> s(trace.selected.begin(), trace.selected.begin() + static_cast<std::ptrdiff_t>(m));
      std::sort(s.begin(), s.end());
      greedy_prefixes.push_back(std::move(s));
    }
  } catch (const NumericalError&) {
  }

  std::vector<std::vector<std::size_t>> beam{{}};
  for (std::size_t m = 1; m <= top; ++m) {
    std::set<std::vector<std::size_t>> next;
    for (const auto& s : beam) {
      for (std::size_t j = 0; j < n; ++j) {
        if (std::find(s.begin(), s.end(), j) != s.end()) continue;
        auto e = s;
        e.insert(std::upper_bound(e.begin(), e.end(), j), j);
        next.insert(std::move(e));
      }
    }
    if (m <= greedy_prefixes.size()) next.insert(greedy_prefixes[m - 1]);
    std::vector<std::vector<std::size_t>> cands(next.begin(), next.end());
    std::vector<double> vals(cands.size());
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(cands.size(), threads * 4));
    detail::for_each_chunk(cands.size(), threads, chunks, [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) vals[i] = project(cands[i]);
    });
    table.projections += cands.size();
    std::vector<std::size_t> order(cands.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    beam.clear();
    for (std::size_t i = 0; i < std::min(options.beam_width, order.size()); ++i) beam.push_back(cands[order[i]]);
    table.values.push_back(vals[order.front()]);
    table.supports.push_back(cands[order.front()]);
  }
  return table;
}

DecayBoundReport verify_decay_bound(const GreedyTrace& trace, int K, double r, double V, double eps,
                                    const SmoothnessParams& params, double t, double rel_slack) {
  if (K < 1) throw std::invalid_argument("verify_decay_bound: K must be positive");
  if (!(V > 0.0)) throw std::invalid_argument("verify_decay_bound: V must be positive");
  if (eps < 0.0) throw std::invalid_argument("verify_decay_bound: eps must be nonnegative");
  if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("verify_decay_bound: t must lie in (0, 1]");
  const double qc = params.q_conj;
  const double exponent = r * qc;
  if (exponent < 1.0 - 1e-12) throw std::invalid_argument("verify_decay_bound: requires r q' >= 1");

  DecayBoundReport rep;
  rep.exponent = exponent;
  rep.c1 = std::pow(t, qc) /
           (2.0 * std::pow(16.0 * params.gamma, 1.0 / (params.q - 1.0)) * std::pow(V, qc));
  const double rate = rep.c1 / std::pow(static_cast<double>(K), exponent);
  const auto& norms = trace.residual_norms;
  for (std::size_t m = 1; m < norms.size(); ++m) {
    for (std::size_t k = 0; k < m; ++k) {
      const double bound = norms[k] * std::exp(-rate * static_cast<double>(m - k)) + 2.0 * eps;
      const double ratio = bound > 0.0 ? norms[m] / bound : (norms[m] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      ++rep.pairs_checked;
      if (ratio > rep.max_ratio || rep.pairs_checked == 1) {
        rep.max_ratio = ratio;
        rep.worst_k = k;
        rep.worst_m = m;
      }
      if (ratio > 1.0 + rel_slack) ++rep.violations;
    }
  }
  rep.min_slack = 1.0 - rep.max_ratio;
  rep.pass = rep.violations == 0;
  return rep;
}

RateBoundReport verify_rate_bound(const GreedyTrace& trace, double a_eps, double eps,
                                  const SmoothnessParams& params, double t) {
  if (a_eps < 0.0 || eps < 0.0) throw std::invalid_argument("verify_rate_bound: negative A or eps");
  RateBoundReport rep;
  const double qc = params.q_conj;
  const double tq = std::pow(t, qc);
  for (std::size_t m = 0; m < trace.residual_norms.size(); ++m) {
    const double fm = trace.residual_norms[m];
    if (fm <= 2.0 * eps) continue;
    const double envelope = (a_eps + eps) * std::pow(1.0 + static_cast<double>(m) * tq, -1.0 / qc);
    const double needed = envelope > 0.0 ? fm / envelope : std::numeric_limits<double>::infinity();
    ++rep.rows_constrained;
    if (needed > rep.constant) {
      rep.constant = needed;
      rep.binding_m = m;
    }
  }
  return rep;
}

double fit_loglog_slope(const std::vector<double>& ms, const std::vector<double>& values) {
  if (ms.size() != values.size()) throw std::invalid_argument("fit_loglog_slope: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (!(ms[i] > 0.0) || !(values[i] > 0.0)) continue;
    const double x = std::log(ms[i]);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("fit_loglog_slope: fewer than two usable points");
  const double dn = static_cast<double>(n);
  const double den = dn * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("fit_loglog_slope: degenerate abscissae");
  return (dn * sxy - sx * sy) / den;
}

Lemma31Report lemma31_check(const Dictionary& dict, int D, double delta, std::size_t trials,
                            std::uint64_t seed, double rel_slack) {
  if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("lemma31_check: delta must lie in [0, 1)");
  if (D < 1) throw std::invalid_argument("lemma31_check: D must be positive");
  const int depth = std::min<int>(D, static_cast<int>(dict.size()));
  Lemma31Report rep;
  rep.bound = (1.0 + delta) / (1.0 - delta);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> size_dist(1, depth);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::size_t> all(dict.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const double w = dict.grid().weight();
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const auto s = static_cast<std::size_t>(size_dist(rng));
    for (std::size_t i = 0; i < s; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
      std::swap(all[i], all[pick(rng)]);
    }
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dict.grid().size()));
    Eigen::VectorXd part = f;
    for (std::size_t i = 0; i < s; ++i) {
      const double a = normal(rng);
      const auto col = dict.column(all[i]);
      f += a * col;
      if (coin(rng)) part += a * col;
    }
    const double ff = w * f.squaredNorm();
    const double pp = w * part.squaredNorm();
    const double ratio = ff > 0.0 ? pp / ff : 0.0;
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (pp > rep.bound * ff * (1.0 + rel_slack)) ++rep.violations;
    ++rep.trials;
  }
  return rep;
}

}  // namespace wcga
