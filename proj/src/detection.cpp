#include "coherence/detection.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "coherence/error.hpp"

namespace coherence::detection {

namespace {

const char* token(OpKind kind) {
  switch (kind) {
    case OpKind::e_minus: return "E-";
    case OpKind::e_plus: return "E+";
    case OpKind::psi_dag: return "Psi+";
    case OpKind::psi: return "Psi";
  }
  return "?";
}

OpKind conjugate(OpKind kind) {
  switch (kind) {
    case OpKind::e_minus: return OpKind::e_plus;
    case OpKind::e_plus: return OpKind::e_minus;
    case OpKind::psi_dag: return OpKind::psi;
    case OpKind::psi: return OpKind::psi_dag;
  }
  return kind;
}

std::vector<const DetectorSpec*> by_gate_rank(const DetectionPlan& plan) {
  const std::size_t n = plan.detectors.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "empty detection plan");
  std::vector<bool> seen(n, false);
  for (const DetectorSpec& d : plan.detectors) {
    if (d.gate_rank < 1 || static_cast<std::size_t>(d.gate_rank) > n ||
        seen[d.gate_rank - 1])
      fail(ErrorCode::InvalidRankPermutation,
           "gate ranks must form a permutation of 1..n");
    seen[d.gate_rank - 1] = true;
  }
  std::vector<const DetectorSpec*> sorted(n);
  for (const DetectorSpec& d : plan.detectors) sorted[d.gate_rank - 1] = &d;
  return sorted;
}

std::string time_symbol(const DetectorSpec& d) { return "t" + d.id; }

int schrodinger_count(const DetectionPlan& plan) {
  return static_cast<int>(
      std::count_if(plan.detectors.begin(), plan.detectors.end(),
                    [](const DetectorSpec& d) { return d.kind == DetectorKind::schrodinger; }));
}

bool survives(const OperatorString& s, std::size_t n_detectors) {
  std::set<std::string> times;
  for (const SymbolicOp& op : s.ops) times.insert(op.time);
  return times.size() == n_detectors;
}

}  // namespace

std::string OperatorString::str() const {
  std::string out;
  for (const SymbolicOp& op : ops) {
    if (!out.empty()) out += ' ';
    out += token(op.kind);
    out += '[';
    out += op.position;
    out += '@';
    out += op.time;
    out += ']';
  }
  return out;
}

OperatorString select_ordering(const DetectionPlan& plan) {
  const auto sorted = by_gate_rank(plan);
  OperatorString s;
  s.ops.reserve(2 * sorted.size());
  for (const DetectorSpec* d : sorted) {
    s.ops.push_back({d->kind == DetectorKind::maxwell ? OpKind::e_minus : OpKind::psi_dag,
                     d->position, time_symbol(*d)});
  }
  for (std::size_t k = sorted.size(); k-- > 0;) {
    s.ops.push_back({conjugate(s.ops[k].kind), sorted[k]->position,
                     time_symbol(*sorted[k])});
  }
  return s;
}

std::int64_t count_amplitude_terms(int n_maxwell, int m_schrodinger) {
  if (n_maxwell < 0 || m_schrodinger < 0)
    fail(ErrorCode::InvalidArgument, "detector counts must be nonnegative");
  const int total = n_maxwell + m_schrodinger;
  if (total > 12) fail(ErrorCode::Overflow, "factorial guard: N + M must be <= 12");
  std::int64_t value = 1;
  for (int k = 2; k <= total; ++k) value *= k;
  return value;
}

const char* to_string(ContributionClass cls) noexcept {
  switch (cls) {
    case ContributionClass::direct: return "direct";
    case ContributionClass::boson_exchange: return "boson_exchange";
    case ContributionClass::fermion_cross: return "fermion_cross";
  }
  return "?";
}

std::vector<ContributionTerm> enumerate_contributions(const DetectionPlan& plan,
                                                      bool distinguishable) {
  const int m = schrodinger_count(plan);
  if (m != 0 && m != 2)
    fail(ErrorCode::UnsupportedDetectorCount,
         "exchange classes are derived for exactly two Schrodinger detectors");
  const std::size_t n_det = plan.detectors.size();
  const OperatorString direct_string = select_ordering(plan);

  std::vector<std::string> maxwell_eff;
  for (const DetectorSpec& d : plan.detectors)
    if (d.kind == DetectorKind::maxwell) maxwell_eff.push_back("eta_m(" + d.position + ")");

  std::vector<ContributionTerm> terms;
  if (m == 0) {
    terms.push_back({ContributionClass::direct, maxwell_eff, direct_string,
                     survives(direct_string, n_det), 1});
    return terms;
  }

  std::vector<const DetectorSpec*> schro;
  for (const DetectorSpec& d : plan.detectors)
    if (d.kind == DetectorKind::schrodinger) schro.push_back(&d);
  const DetectorSpec& sa = *schro[0];
  const DetectorSpec& sb = *schro[1];

  ContributionTerm direct{ContributionClass::direct, maxwell_eff, direct_string, true, 1};
  direct.efficiencies.push_back("eta_s(" + sa.position + ")");
  direct.efficiencies.push_back("eta_s(" + sb.position + ")");
  direct.survives_counting_rate = survives(direct.ops, n_det);
  terms.push_back(direct);
  if (distinguishable) return terms;

  // composite-boson exchange: the two Schrodinger annihilation times swap
  ContributionTerm exchange{ContributionClass::boson_exchange, maxwell_eff,
                            direct_string, true, 1};
  exchange.efficiencies.push_back("eta_s(" + sa.position + "," + sb.position + ")");
  exchange.efficiencies.push_back("eta_s(" + sb.position + "," + sa.position + ")");
  {
    std::vector<std::size_t> psi_slots;
    for (std::size_t i = 0; i < exchange.ops.ops.size(); ++i)
      if (exchange.ops.ops[i].kind == OpKind::psi) psi_slots.push_back(i);
    std::swap(exchange.ops.ops[psi_slots[0]].time, exchange.ops.ops[psi_slots[1]].time);
  }
  exchange.survives_counting_rate = survives(exchange.ops, n_det);
  terms.push_back(exchange);

  // constituent-only exchange: all Schrodinger operators collapse onto the
  // time of the earlier-gated detector; enters the signal subtractively
  ContributionTerm cross{ContributionClass::fermion_cross, maxwell_eff, direct_string,
                         false, 2};
  cross.efficiencies.push_back("eta_x(" + sa.position + "," + sb.position + ")");
  const std::string collapsed =
      time_symbol(sa.gate_rank < sb.gate_rank ? sa : sb);
  for (SymbolicOp& op : cross.ops.ops)
    if (op.kind == OpKind::psi || op.kind == OpKind::psi_dag) op.time = collapsed;
  cross.survives_counting_rate = survives(cross.ops, n_det);
  terms.push_back(cross);
  return terms;
}

std::vector<ContributionTerm> counting_rate_terms(const DetectionPlan& plan,
                                                  bool distinguishable) {
  std::vector<ContributionTerm> all = enumerate_contributions(plan, distinguishable);
  std::erase_if(all, [](const ContributionTerm& t) { return !t.survives_counting_rate; });
  return all;
}

std::string SignedDeltaProduct::str() const {
  std::string out = sign >= 0 ? "+" : "-";
  for (const LabelDelta& d : deltas) {
    out += " d_";
    out += d.slot;
    out += '(';
    out += d.left;
    out += ',';
    out += d.right;
    out += ')';
  }
  return out;
}

std::vector<SignedDeltaProduct> fermi_vacuum_expectation(const FermiOpString& s) {
  if (s.ops.size() > 8) fail(ErrorCode::StringTooLong, "fermionic strings capped at 8");
  std::vector<std::size_t> ann, cre;
  for (std::size_t i = 0; i < s.ops.size(); ++i)
    (s.ops[i].create ? cre : ann).push_back(i);
  if (ann.size() != cre.size()) return {};
  const std::size_t n = ann.size();
  if (n == 0) return {{1, {}}};

  std::vector<SignedDeltaProduct> terms;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    // annihilator ann[k] pairs with creator cre[perm[k]]; a pair contracts on
    // the vacuum only when the annihilator stands to the left
    bool allowed = true;
    for (std::size_t k = 0; k < n && allowed; ++k) allowed = ann[k] < cre[perm[k]];
    if (!allowed) continue;

    int crossings = 0;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = k + 1; l < n; ++l) {
        const std::size_t a1 = ann[k], c1 = cre[perm[k]];
        const std::size_t a2 = ann[l], c2 = cre[perm[l]];
        const bool inside1 = a1 < a2 && a2 < c1;
        if (inside1 != (c2 < c1)) ++crossings;
      }
    }

    SignedDeltaProduct term;
    term.sign = (crossings % 2 == 0) ? 1 : -1;
    for (std::size_t k = 0; k < n; ++k) {
      const FermiOp& a = s.ops[ann[k]];
      const FermiOp& c = s.ops[cre[perm[k]]];
      if (!a.momentum.empty() || !c.momentum.empty())
        term.deltas.push_back({"q", a.momentum, c.momentum});
      if (!a.spin.empty() || !c.spin.empty())
        term.deltas.push_back({"s", a.spin, c.spin});
      if (!a.channel.empty() || !c.channel.empty())
        term.deltas.push_back({"nu", a.channel, c.channel});
    }
    terms.push_back(std::move(term));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return terms;
}

}  // namespace coherence::detection
