#pragma once

// Jump processes for descents in involutions and derangements, transpositions
// in Fibonacci permutations and excedances in derangements.
//
// Stage m of a process holds the statistic for objects of size m. Each update
// either moves from stage m-1 (a one-jump) or from stage m-2 (a two-jump);
// the position of stage m is m minus the process's base stage, and position 1
// is always a one-jump. Composition positions, Gamma factors and the jump
// rule all use positions; difference laws and alphas use stages.

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "descent/compositions.hpp"
#include "descent/exact_core.hpp"
#include "descent/moments.hpp"
#include "descent/random.hpp"
#include "descent/types.hpp"

namespace descent {

enum class ProcessKind { involution, derangement, fibonacci, excedance };

inline constexpr ProcessKind kAllProcesses[] = {ProcessKind::involution, ProcessKind::derangement,
                                                ProcessKind::fibonacci, ProcessKind::excedance};

inline std::string_view to_string(ProcessKind k) {
  switch (k) {
    case ProcessKind::involution: return "involution";
    case ProcessKind::derangement: return "derangement";
    case ProcessKind::fibonacci: return "fibonacci";
    case ProcessKind::excedance: return "excedance";
  }
  throw domain_error("unknown process kind");
}

inline ProcessKind parse_process_kind(std::string_view name) {
  for (ProcessKind k : kAllProcesses)
    if (to_string(k) == name) return k;
  throw domain_error("unknown process '" + std::string(name) + "'");
}

inline Family family_of(ProcessKind k) {
  switch (k) {
    case ProcessKind::involution: return Family::involution;
    case ProcessKind::derangement: return Family::derangement;
    case ProcessKind::fibonacci: return Family::fibonacci;
    case ProcessKind::excedance: return Family::excedance;
  }
  throw domain_error("unknown process kind");
}

/// Stage whose value is fixed before any jump.
inline int base_stage(ProcessKind k) {
  return k == ProcessKind::derangement || k == ProcessKind::excedance ? 2 : 0;
}

inline long base_value(ProcessKind k) {
  return k == ProcessKind::derangement || k == ProcessKind::excedance ? 1 : 0;
}

/// Range of values the process can take at a stage.
inline std::pair<long, long> support_range(ProcessKind k, int stage) {
  if (stage < base_stage(k))
    throw domain_error(std::string(to_string(k)) + " has no stage " + std::to_string(stage));
  switch (k) {
    case ProcessKind::involution: return {0, std::max(stage - 1, 0)};
    case ProcessKind::derangement:
    case ProcessKind::excedance: return {1, std::max(stage - 1, 1)};
    case ProcessKind::fibonacci: return {0, stage / 2};
  }
  throw domain_error("unknown process kind");
}

struct Transition {
  long increment;
  Rational prob;
};

namespace detail {

inline void check_jump(ProcessKind k, int stage, int order) {
  if (order != 1 && order != 2)
    throw domain_error("jump order must be 1 or 2, got " + std::to_string(order));
  const int position = stage - base_stage(k);
  if (position < order || (order == 2 && position < 2))
    throw domain_error(std::string(to_string(k)) + ": no order-" + std::to_string(order) +
                       " jump into stage " + std::to_string(stage));
}

inline bool in_support(ProcessKind k, int stage, long v) {
  const auto [lo, hi] = support_range(k, stage);
  return v >= lo && v <= hi;
}

}  // namespace detail

/// Law of the increment into stage m given the jump order and the value at
/// the source stage m - order.
inline std::vector<Transition> conditional_law(ProcessKind k, int m, int order, long source) {
  detail::check_jump(k, m, order);
  if (!detail::in_support(k, m - order, source))
    throw infeasible_state_error(std::string(to_string(k)) + ": value " + std::to_string(source) +
                                 " is outside the support at stage " + std::to_string(m - order));
  std::vector<Transition> law;
  switch (k) {
    case ProcessKind::involution:
      if (order == 1) {
        law = {{0, make_rational(source + 1, m)}, {1, make_rational(m - 1 - source, m)}};
      } else {
        const long a = source + 1, b = m - 2 - source, den = static_cast<long>(m - 1) * m;
        law = {{0, make_rational(a * a + m - 2, den)},
               {1, make_rational(2 * a * b - (m - 2) + 1, den)},
               {2, make_rational(b * b + m - 2, den)}};
      }
      break;
    case ProcessKind::derangement:
      if (order == 1)
        law = {{0, make_rational(source + 1, m - 1)}, {1, make_rational(m - 2 - source, m - 1)}};
      else
        law = {{1, make_rational(source + 1, m - 1)}, {2, make_rational(m - 2 - source, m - 1)}};
      break;
    case ProcessKind::excedance:
      if (order == 1)
        law = {{0, make_rational(source, m - 1)}, {1, make_rational(m - 1 - source, m - 1)}};
      else
        law = {{1, Rational(1)}};
      break;
    case ProcessKind::fibonacci:
      law = {{order == 1 ? 0L : 1L, Rational(1)}};
      break;
  }
  for (const auto& t : law)
    if (sgn(t.prob) < 0 || t.prob > 1)
      throw infeasible_state_error(std::string(to_string(k)) + ": value " + std::to_string(source) +
                                   " gives an invalid transition probability into stage " +
                                   std::to_string(m));
  return law;
}

/// Offset c with w = (value at stage i - order) - c.
inline Rational centering_offset(ProcessKind k, int i, int order) {
  switch (k) {
    case ProcessKind::involution: return make_rational(order == 1 ? i - 2 : i - 3, 2);
    case ProcessKind::derangement: return make_rational(i - 3, 2);
    case ProcessKind::excedance: return make_rational(order == 1 ? i - 1 : i - 3, 2);
    case ProcessKind::fibonacci: return Rational(0);
  }
  throw domain_error("unknown process kind");
}

/// Value of the martingale difference X_{i,order} when the source value is
/// `source` and the increment is `increment`.
inline Rational difference_value(ProcessKind k, int i, int order, long source, long increment) {
  switch (k) {
    case ProcessKind::involution:
      return order == 1 ? Rational(source + static_cast<long>(i) * increment - (i - 1))
                        : Rational(2 * source + static_cast<long>(i) * increment - 2L * i + 3);
    case ProcessKind::derangement:
      return order == 1 ? Rational(source - (i - 2) + static_cast<long>(i - 1) * increment)
                        : Rational(source + static_cast<long>(i - 1) * increment - (2L * i - 3));
    case ProcessKind::excedance:
      return order == 1 ? Rational(source - (i - 1) + static_cast<long>(i - 1) * increment) : Rational(0);
    case ProcessKind::fibonacci: return Rational(0);
  }
  throw domain_error("unknown process kind");
}

struct DifferenceAtom {
  long increment;
  Rational value;
  Rational prob;
};

struct DifferenceLaw {
  ProcessKind kind;
  int i;
  int order;
  Rational w;
  std::vector<DifferenceAtom> atoms;

  Rational moment(int r) const {
    Rational total = 0;
    for (const auto& a : atoms) {
      Rational p = a.prob;
      for (int t = 0; t < r; ++t) p *= a.value;
      total += p;
    }
    return total;
  }
  Rational mean() const { return moment(1); }
};

namespace detail {

inline long source_from_w(ProcessKind k, int i, int order, const Rational& w) {
  detail::check_jump(k, i, order);
  const Rational s = w + centering_offset(k, i, order);
  if (s.get_den() != 1)
    throw infeasible_state_error(std::string(to_string(k)) + ": w = " + w.get_str() +
                                 " does not correspond to an integer value at stage " +
                                 std::to_string(i - order));
  if (!s.get_num().fits_slong_p()) throw infeasible_state_error("centered value out of range");
  return s.get_num().get_si();
}

}  // namespace detail

/// Exact law of X_{i,order} given the centered source value w.
inline DifferenceLaw martingale_difference_distribution(ProcessKind k, int i, int order,
                                                        const Rational& w) {
  const long source = detail::source_from_w(k, i, order, w);
  DifferenceLaw law{k, i, order, w, {}};
  for (auto& t : conditional_law(k, i, order, source))
    law.atoms.push_back({t.increment, difference_value(k, i, order, source, t.increment), t.prob});
  return law;
}

/// Closed-form E[X_{i,order}^r | w] for r in {2, 3, 4}.
inline Rational conditional_moment(ProcessKind k, int i, int order, const Rational& w, int r) {
  if (r < 2 || r > 4) throw unsupported_order_error("conditional moments cover r = 2, 3, 4");
  const long source = detail::source_from_w(k, i, order, w);
  conditional_law(k, i, order, source);  // feasibility
  if (k == ProcessKind::fibonacci || (k == ProcessKind::excedance && order == 2)) return 0;
  const Rational w2 = w * w;
  if (k == ProcessKind::involution && order == 2) {
    const Rational x = i;
    const Rational x2 = x * x, x3 = x2 * x;
    switch (r) {
      case 2: return (x3 + 2 * x2 - 7 * x - (4 * x - 8) * w2) / (2 * (x - 1));
      case 3: return ((16 - 4 * x) * w2 * w + (x3 + 8 * x2 - 21 * x) * w) / (x - 1);
      default:
        return (96 * w2 * w2 - (4 * x3 - 80 * x2 + 168 * x) * w2 + x3 * x2 + 2 * x2 * x2 - 7 * x3) /
               (2 * (x - 1));
    }
  }
  const Rational h = k == ProcessKind::involution ? make_rational(i, 2) : make_rational(i - 1, 2);
  const Rational h2 = h * h;
  switch (r) {
    case 2: return h2 - w2;
    case 3: return 2 * h2 * w - 2 * w2 * w;
    default: return h2 * h2 + 2 * h2 * w2 - 3 * w2 * w2;
  }
}

/// Factor a two-part ending at position k contributes to Gamma.
inline Rational gamma_step(ProcessKind k, int position) {
  switch (k) {
    case ProcessKind::derangement: return make_rational(position, position - 1);
    case ProcessKind::excedance: return make_rational(position + 1, position - 1);
    case ProcessKind::involution:
    case ProcessKind::fibonacci: return Rational(1);
  }
  throw domain_error("unknown process kind");
}

/// Product of gamma_step over the two-parts of comp ending after `position`.
inline Rational gamma_factor(ProcessKind k, const Composition& comp, int position) {
  const int n = comp.total();
  if (position < 1 || position > n)
    throw index_error("position " + std::to_string(position) + " is outside 1.." + std::to_string(n));
  Rational g = 1;
  int end = 0;
  for (int a : comp.parts) {
    end += a;
    if (end > position && a == 2) g *= gamma_step(k, end);
  }
  return g;
}

inline Rational gamma_factor(const Composition& comp, int position) {
  return gamma_factor(ProcessKind::derangement, comp, position);
}

/// Deterministic part of the increment of the scaled centered process over a
/// jump into stage i. mu[j] must hold the exact mean at stage j.
inline Rational alpha_term(ProcessKind k, int i, int order, std::span<const Rational> mu) {
  detail::check_jump(k, i, order);
  if (k == ProcessKind::involution) return 0;
  if (mu.size() <= static_cast<std::size_t>(i))
    throw dependency_error("alpha at stage " + std::to_string(i) + " needs means through stage " +
                           std::to_string(i));
  const Rational& mi = mu[static_cast<std::size_t>(i)];
  const Rational& ms = mu[static_cast<std::size_t>(i - order)];
  switch (k) {
    case ProcessKind::derangement:
      return order == 1 ? Rational(i - 2 - (i - 1) * mi + (i - 2) * ms)
                        : Rational(2 * i - 3 - (i - 1) * mi + (i - 2) * ms);
    case ProcessKind::excedance:
      return order == 1 ? Rational(i - 1 - (i - 1) * mi + (i - 2) * ms)
                        : Rational((i - 1) * (1 - mi + ms));
    case ProcessKind::fibonacci:
      return order == 1 ? Rational(ms - mi) : Rational(1 + ms - mi);
    case ProcessKind::involution: break;
  }
  return 0;
}

/// Multiplier of (value_n - mu_n) in the process whose increments are X + alpha.
inline Rational process_scale(ProcessKind k, int n) {
  switch (k) {
    case ProcessKind::involution: return n;
    case ProcessKind::fibonacci: return 1;
    case ProcessKind::derangement:
    case ProcessKind::excedance: return n - 1;
  }
  throw domain_error("unknown process kind");
}

struct ProcessState {
  ProcessKind kind;
  int n;      // stage of prev
  long prev;  // value at stage n
  long last;  // value at stage n + 1
};

enum class JumpSource { prev, last };

struct JumpOutcome {
  JumpSource source;
  long increment;
  long value;
  Rational prob;
};

struct JumpDistribution {
  std::vector<JumpOutcome> entries;

  Rational total() const {
    Rational t = 0;
    for (const auto& e : entries) t += e.prob;
    return t;
  }

  /// Law of the value at stage n + 2.
  ExactPmf marginal() const {
    if (entries.empty()) throw degenerate_error("empty jump distribution");
    long lo = entries.front().value, hi = lo;
    for (const auto& e : entries) {
      lo = std::min(lo, e.value);
      hi = std::max(hi, e.value);
    }
    ExactPmf pmf;
    pmf.offset = lo;
    pmf.weights.assign(static_cast<std::size_t>(hi - lo + 1), Rational(0));
    for (const auto& e : entries) pmf.weights[static_cast<std::size_t>(e.value - lo)] += e.prob;
    return pmf;
  }
};

struct Step {
  int stage;
  int order;
  long value;
};

struct DecompositionTerm {
  int position;
  int stage;
  int part;
  long source;
  long increment;
  Rational w;
  Rational difference;
  Rational adjustment;
  Rational factor;
};

struct Decomposition {
  Composition composition;
  std::vector<DecompositionTerm> terms;
  Rational scale;
  Rational final_mean;
};

struct Trajectory {
  ProcessKind kind;
  int n;
  long initial;
  std::vector<Step> steps;  // stages base+1 .. n
  long final_value;
  std::optional<Decomposition> decomposition;

  long value_at(int stage) const {
    const int b = base_stage(kind);
    if (stage == b) return initial;
    if (stage < b || stage > n) throw index_error("trajectory has no stage " + std::to_string(stage));
    return steps[static_cast<std::size_t>(stage - b - 1)].value;
  }
};

/// Steps must chain: each value comes from its source by a feasible increment.
inline bool replay_consistent(const Trajectory& t) {
  long current = t.initial;
  for (const auto& s : t.steps) {
    const long source = t.value_at(s.stage - s.order);
    bool ok = false;
    for (const auto& tr : conditional_law(t.kind, s.stage, s.order, source))
      if (source + tr.increment == s.value && sgn(tr.prob) > 0) ok = true;
    if (!ok) return false;
    current = s.value;
  }
  return current == t.final_value;
}

/// residual = scale * (value_n - mu_n) - sum Gamma (X + alpha).
inline Rational reconstruct(const Trajectory& t) {
  if (!t.decomposition) throw missing_data_error("trajectory was recorded without a decomposition");
  const auto& d = *t.decomposition;
  Rational residual = d.scale * (Rational(t.final_value) - d.final_mean);
  for (const auto& term : d.terms) residual -= term.factor * (term.difference + term.adjustment);
  return residual;
}

struct CompositionMoments {
  Rational mean;                   // E[S | a], zero for a martingale sum
  Rational second_moment;          // E[S^2 | a] by path expansion
  Rational second_moment_closed;   // sum Gamma^2 E[E[X^2 | w]]
  Rational alpha_sum;              // sum Gamma alpha
};

class ProcessSampler;

/// Exact quantities for one process up to a maximum stage.
class ProcessModel {
 public:
  ProcessModel(ProcessKind k, int n_max) : kind_(k), n_max_(n_max) {
    const Family f = family_of(k);
    if (n_max < min_row(f))
      throw domain_error(std::string(to_string(k)) + ": n = " + std::to_string(n_max) +
                         " is below the minimum " + std::to_string(min_row(f)));
    counts_ = counting_sequence(f, n_max);
    const CountTriangle t = descent_triangle(f, n_max);
    means_.assign(static_cast<std::size_t>(n_max) + 1, Rational(0));
    for (int j = t.n_min(); j <= n_max; ++j)
      means_[static_cast<std::size_t>(j)] = factorial_moment(triangle_row_pmf(t, j), 1);
  }

  ProcessKind kind() const noexcept { return kind_; }
  int n_max() const noexcept { return n_max_; }
  std::span<const Integer> counts() const noexcept { return counts_; }
  std::span<const Rational> means() const noexcept { return means_; }
  const Rational& mean(int stage) const {
    check_stage(stage);
    return means_[static_cast<std::size_t>(stage)];
  }

  /// Probability that the update into stage m is a two-jump.
  Rational two_jump_probability(int m) const {
    check_stage(m);
    if (m - base_stage(kind_) < 2) return 0;
    const auto& c = counts_;
    const auto u = static_cast<std::size_t>(m);
    Rational q;
    if (kind_ == ProcessKind::fibonacci)
      q = Rational(c[u - 2], c[u]);
    else
      q = Rational(Integer((m - 1) * c[u - 2]), c[u]);
    q.canonicalize();
    return q;
  }

  /// Two-jump probabilities indexed by position.
  JumpRule jump_rule() const {
    auto self = std::make_shared<const ProcessModel>(*this);
    const int b = base_stage(kind_);
    return JumpRule::binary([self, b](int p) { return self->two_jump_probability(p + b); });
  }

  JumpDistribution jump_distribution(const ProcessState& s) const {
    if (s.kind != kind_) throw domain_error("state belongs to a different process");
    if (s.n < base_stage(kind_))
      throw domain_error("state stage " + std::to_string(s.n) + " precedes the base stage");
    const int m = s.n + 2;
    check_stage(m);
    if (!detail::in_support(kind_, s.n, s.prev) || !detail::in_support(kind_, s.n + 1, s.last))
      throw infeasible_state_error("state values are outside the supports of their stages");
    const Rational q = two_jump_probability(m);
    JumpDistribution out;
    for (const auto& t : conditional_law(kind_, m, 2, s.prev))
      out.entries.push_back({JumpSource::prev, t.increment, s.prev + t.increment, q * t.prob});
    for (const auto& t : conditional_law(kind_, m, 1, s.last))
      out.entries.push_back({JumpSource::last, t.increment, s.last + t.increment, (1 - q) * t.prob});
    return out;
  }

  /// Exact law of the value at stage n by propagating the joint law of
  /// consecutive values through every jump.
  ExactPmf path_expansion(int n) const {
    check_stage(n);
    if (n < min_row(family_of(kind_))) throw domain_error("stage below the family's first row");
    std::map<std::pair<long, long>, Rational> joint;
    const long v0 = base_value(kind_);
    joint[{v0, v0}] = 1;
    for (int m = base_stage(kind_) + 1; m <= n; ++m) {
      const Rational q = two_jump_probability(m);
      std::map<std::pair<long, long>, Rational> next;
      for (const auto& [state, p] : joint) {
        if (sgn(q) > 0)
          for (const auto& t : conditional_law(kind_, m, 2, state.first))
            if (sgn(t.prob) > 0) next[{state.second, state.first + t.increment}] += p * q * t.prob;
        if (q != 1)
          for (const auto& t : conditional_law(kind_, m, 1, state.second))
            if (sgn(t.prob) > 0)
              next[{state.second, state.second + t.increment}] += p * (1 - q) * t.prob;
      }
      joint = std::move(next);
    }
    const auto [lo, hi] = support_range(kind_, n);
    ExactPmf pmf;
    pmf.offset = lo;
    pmf.weights.assign(static_cast<std::size_t>(hi - lo + 1), Rational(0));
    for (const auto& [state, p] : joint) pmf.weights[static_cast<std::size_t>(state.second - lo)] += p;
    return pmf;
  }

  /// Fills in the composition, differences, alphas and Gamma factors.
  Decomposition decompose(const Trajectory& t) const {
    if (t.kind != kind_) throw domain_error("trajectory belongs to a different process");
    check_stage(t.n);
    const int b = base_stage(kind_);
    Decomposition d;
    d.scale = process_scale(kind_, t.n);
    d.final_mean = means_[static_cast<std::size_t>(t.n)];
    if (t.steps.empty()) return d;
    JumpWord word;
    word.letters.reserve(t.steps.size());
    for (const auto& s : t.steps) word.letters.push_back(s.order);
    d.composition = discard_map(word);
    const auto ends = d.composition.ends();
    const auto parts = d.composition.parts.size();
    d.terms.resize(parts);
    Rational g = 1;
    for (std::size_t j = parts; j-- > 0;) {
      const int p = ends[j];
      const int a = d.composition.parts[j];
      const int i = p + b;
      auto& term = d.terms[j];
      term.position = p;
      term.stage = i;
      term.part = a;
      term.source = t.value_at(i - a);
      term.increment = t.value_at(i) - term.source;
      term.w = Rational(term.source) - centering_offset(kind_, i, a);
      const auto law = martingale_difference_distribution(kind_, i, a, term.w);
      const DifferenceAtom* hit = nullptr;
      for (const auto& atom : law.atoms)
        if (atom.increment == term.increment && sgn(atom.prob) > 0) hit = &atom;
      if (!hit)
        throw infeasible_state_error("trajectory takes an impossible increment into stage " +
                                     std::to_string(i));
      term.difference = hit->value;
      term.adjustment = alpha_term(kind_, i, a, means_);
      term.factor = g;
      if (a == 2) g *= gamma_step(kind_, p);
    }
    return d;
  }

  /// Conditional moments of the decomposition given a fixed composition of
  /// n - base, by exact expansion of the chain of surviving jumps.
  CompositionMoments composition_moments(const Composition& comp) const {
    validate_composition(comp);
    const int b = base_stage(kind_);
    check_stage(comp.total() + b);
    const auto ends = comp.ends();
    std::vector<Rational> factors(comp.parts.size());
    Rational g = 1;
    for (std::size_t j = comp.parts.size(); j-- > 0;) {
      factors[j] = g;
      if (comp.parts[j] == 2) g *= gamma_step(kind_, ends[j]);
    }
    CompositionMoments out;
    std::map<std::pair<long, Rational>, Rational> joint;  // (value, partial sum) -> prob
    joint[{base_value(kind_), Rational(0)}] = 1;
    for (std::size_t j = 0; j < comp.parts.size(); ++j) {
      const int a = comp.parts[j];
      const int i = ends[j] + b;
      const Rational& f = factors[j];
      out.alpha_sum += f * alpha_term(kind_, i, a, means_);
      std::map<long, Rational> marginal;
      for (const auto& [state, p] : joint) marginal[state.first] += p;
      for (const auto& [v, p] : marginal) {
        const Rational w = Rational(v) - centering_offset(kind_, i, a);
        out.second_moment_closed += f * f * p * conditional_moment(kind_, i, a, w, 2);
      }
      std::map<std::pair<long, Rational>, Rational> next;
      for (const auto& [state, p] : joint)
        for (const auto& t : conditional_law(kind_, i, a, state.first)) {
          if (sgn(t.prob) == 0) continue;
          const Rational x = difference_value(kind_, i, a, state.first, t.increment);
          next[{state.first + t.increment, state.second + f * x}] += p * t.prob;
        }
      joint = std::move(next);
    }
    for (const auto& [state, p] : joint) {
      out.mean += p * state.second;
      out.second_moment += p * state.second * state.second;
    }
    return out;
  }

 private:
  void check_stage(int stage) const {
    if (stage < 0 || stage > n_max_)
      throw domain_error(std::string(to_string(kind_)) + " model covers stages up to " +
                         std::to_string(n_max_) + ", asked for " + std::to_string(stage));
  }

  ProcessKind kind_;
  int n_max_;
  std::vector<Integer> counts_;
  std::vector<Rational> means_;
};

/// Jump law for the value at stage n + 2 given the values at n and n + 1.
inline JumpDistribution jump_distribution(const ProcessState& s) {
  return ProcessModel(s.kind, std::max(s.n + 2, min_row(family_of(s.kind)))).jump_distribution(s);
}

/// Precomputed thresholds for simulating a process up to stage n. Each
/// update draws one word for the jump order (from position 2 on) and one
/// word for the outcome.
class ProcessSampler {
 public:
  ProcessSampler(const ProcessModel& model, int n) : kind_(model.kind()), n_(n) {
    if (n > model.n_max()) throw domain_error("sampler range exceeds the model");
    if (n < min_row(family_of(kind_)))
      throw domain_error(std::string(to_string(kind_)) + ": n = " + std::to_string(n) +
                         " is below the minimum");
    const int b = base_stage(kind_);
    for (int m = b + 1; m <= n; ++m) {
      StageTables st;
      st.two_jump = probability_threshold(model.two_jump_probability(m));
      for (int order = 1; order <= 2; ++order) {
        if (order == 2 && m - b < 2) break;
        auto& side = order == 1 ? st.one : st.two;
        const auto [lo, hi] = support_range(kind_, m - order);
        side.lo = lo;
        for (long s = lo; s <= hi; ++s) {
          const auto law = conditional_law(kind_, m, order, s);
          std::vector<Rational> probs;
          side.increments.clear();
          for (const auto& t : law) {
            probs.push_back(t.prob);
            side.increments.push_back(t.increment);
          }
          side.tables.emplace_back(probs);
        }
      }
      stages_.push_back(std::move(st));
    }
  }

  ProcessKind kind() const noexcept { return kind_; }
  int n() const noexcept { return n_; }

  template <class Rng>
  Trajectory operator()(Rng& rng) const {
    Trajectory t{kind_, n_, base_value(kind_), {}, base_value(kind_), std::nullopt};
    t.steps.reserve(stages_.size());
    const int b = base_stage(kind_);
    long prev = t.initial, last = t.initial;
    for (std::size_t j = 0; j < stages_.size(); ++j) {
      const int m = b + 1 + static_cast<int>(j);
      const int order = draw_order(j, rng);
      const long source = order == 2 ? prev : last;
      const long value = source + draw_increment(j, order, source, rng);
      t.steps.push_back({m, order, value});
      prev = last;
      last = value;
    }
    t.final_value = last;
    return t;
  }

  /// Final value only, with no allocation.
  template <class Rng>
  long sample_final(Rng& rng) const {
    long prev = base_value(kind_), last = prev;
    for (std::size_t j = 0; j < stages_.size(); ++j) {
      const int order = draw_order(j, rng);
      const long source = order == 2 ? prev : last;
      const long value = source + draw_increment(j, order, source, rng);
      prev = last;
      last = value;
    }
    return last;
  }

 private:
  struct Side {
    long lo = 0;
    std::vector<long> increments;
    std::vector<CategoricalTable> tables;
  };
  struct StageTables {
    Threshold two_jump = 0;
    Side one, two;
  };

  template <class Rng>
  int draw_order(std::size_t j, Rng& rng) const {
    if (j == 0) return 1;
    return Threshold{rng()} < stages_[j].two_jump ? 2 : 1;
  }

  template <class Rng>
  long draw_increment(std::size_t j, int order, long source, Rng& rng) const {
    const Side& side = order == 2 ? stages_[j].two : stages_[j].one;
    const auto& table = side.tables[static_cast<std::size_t>(source - side.lo)];
    return side.increments[table.pick(rng())];
  }

  ProcessKind kind_;
  int n_;
  std::vector<StageTables> stages_;
};

/// One trajectory from the stream of replicate 0 under `seed`.
inline Trajectory simulate(ProcessKind k, int n, std::uint64_t seed, bool record) {
  const ProcessModel model(k, n);
  const ProcessSampler sampler(model, n);
  auto rng = replicate_stream(seed, 0);
  Trajectory t = sampler(rng);
  if (record) t.decomposition = model.decompose(t);
  return t;
}

}  // namespace descent
