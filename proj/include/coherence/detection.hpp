#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace coherence::detection {

enum class DetectorKind { maxwell, schrodinger };

/// One gated detector: its kind, position label, and the rank of its
/// switch-off time among all detectors (1 = first to switch off). The time
/// symbol attached to its operators is "t" + id.
struct DetectorSpec {
  std::string id;
  DetectorKind kind = DetectorKind::maxwell;
  std::string position;
  int gate_rank = 0;
};

struct DetectionPlan {
  std::vector<DetectorSpec> detectors;
};

enum class OpKind { e_minus, e_plus, psi_dag, psi };

struct SymbolicOp {
  OpKind kind = OpKind::e_minus;
  std::string position;
  std::string time;
  friend bool operator==(const SymbolicOp&, const SymbolicOp&) = default;
};

/// Mirror-shaped operator string: daggered/negative-frequency half on the
/// left, conjugate mirror on the right, times increasing outside-in.
/// Canonical text form: tokens like "E-[r1@t1]" / "Psi+[r3@t3]", space
/// separated; stable across releases.
struct OperatorString {
  std::vector<SymbolicOp> ops;
  std::string str() const;
  friend bool operator==(const OperatorString&, const OperatorString&) = default;
};

/// Operator ordering selected by a gate-rank permutation: left half sorted by
/// ascending switch-off rank (Maxwell -> E-, Schrodinger -> Psi+), right half
/// the reversed conjugates.
OperatorString select_ordering(const DetectionPlan& plan);

/// (N + M)! with an overflow guard at N + M = 12.
std::int64_t count_amplitude_terms(int n_maxwell, int m_schrodinger);

enum class ContributionClass { direct, boson_exchange, fermion_cross };

const char* to_string(ContributionClass cls) noexcept;

/// One symbolic contribution to the joint counting signal. Efficiency factors
/// are names only; numbers are supplied downstream. The fermion_cross class
/// enters the signal subtractively and carries the integer prefactor 2 (either
/// constituent species can be exchanged).
struct ContributionTerm {
  ContributionClass cls = ContributionClass::direct;
  std::vector<std::string> efficiencies;
  OperatorString ops;
  bool survives_counting_rate = true;
  int prefactor = 1;
};

/// Contribution classes for a plan with two Schrodinger detectors (or none:
/// plain photodetection). Indistinguishable ionization channels produce
/// direct + boson-exchange + fermion-cross; distinguishable ones only direct.
std::vector<ContributionTerm> enumerate_contributions(const DetectionPlan& plan,
                                                      bool distinguishable);

/// Terms surviving the per-detector time derivatives of the counting rate
/// (those whose strings carry all N + M distinct gate times).
std::vector<ContributionTerm> counting_rate_terms(const DetectionPlan& plan,
                                                  bool distinguishable);

/// Labeled fermionic ladder operator; empty label slots are unused.
struct FermiOp {
  bool create = false;
  std::string momentum;
  std::string spin;
  std::string channel;
};

struct FermiOpString {
  std::vector<FermiOp> ops;
};

/// Label-equality requirement delta_slot(left, right).
struct LabelDelta {
  std::string slot;
  std::string left;
  std::string right;
  friend bool operator==(const LabelDelta&, const LabelDelta&) = default;
};

struct SignedDeltaProduct {
  int sign = 1;
  std::vector<LabelDelta> deltas;
  std::string str() const;
  friend bool operator==(const SignedDeltaProduct&, const SignedDeltaProduct&) = default;
};

/// Vacuum expectation of a fermionic ladder string by full Wick contraction:
/// every annihilator pairs with a creator to its right, term sign is the pair
/// crossing parity. Empty result means zero. Length capped at 8.
std::vector<SignedDeltaProduct> fermi_vacuum_expectation(const FermiOpString& s);

}  // namespace coherence::detection
