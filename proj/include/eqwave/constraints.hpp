#pragma once

// Case engine: vanishing extended coordinates, the generator constraints
// they imply, the table of functional-dependency cases and classification
// of a member's signature against it.

#include <array>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "eqwave/family.hpp"
#include "eqwave/generators.hpp"

namespace eqwave {

// Vanishing coordinates: "s1j"/"s2j" (f or g free of the j-th jet),
// "tj" (h free of it) and "h" (h identically zero, which also removes
// t1..t3).
struct CaseSpec {
  std::set<std::string> vanishing;

  // Components forced to zero: "S1j", "S2j", "Tj", "H".
  std::vector<std::string> implied_components() const;
  // Vanishing set with "h" expanded to include t1..t3.
  std::set<std::string> closure() const;
};

struct Residual {
  std::string component;
  Expr value;
};

// Nonzero residuals of the implied components, with the vanishing
// coordinates set to zero. Empty when the constraints hold identically.
std::vector<Residual> constraint_residuals(const CaseSpec& spec, const GeneratorSet& gs);

enum class Verdict { linearizable, not_linearizable, uncovered };
std::string verdict_name(Verdict v);  // "L<=>N", "L/N<=>L/N", "UNCOVERED"

struct Shapes {
  std::string xi1, xi2, xi3, eta;
};

struct Probe {
  std::string description;  // what is changed in the instantiation
  std::function<void(FreeData&)> modify;
};

struct CatalogRow {
  std::string id;
  std::array<std::string, 3> members;  // f, g, h dependence as printed
  CaseSpec spec;
  Shapes shapes;
  Verdict verdict;
  std::vector<std::string> witnesses;
  std::vector<std::string> discrepancies;
  // Free data realising the claimed shapes; solve_wave_determining (with
  // overwrite) completes it.
  std::function<FreeData()> instantiate;
  // Modifications that must break a constraint.
  std::vector<Probe> probes;
};

const std::vector<CatalogRow>& catalog();
const CatalogRow& catalog_row(const std::string& id);  // throws std::out_of_range

// x <-> y mirror of free data: swaps x/y and u_x/u_y inside every slot and
// exchanges the φ¹/φ², α¹¹/α²², β¹/β² slots (α¹² changes sign).
FreeData mirror(const FreeData& fd);
CaseSpec mirror(const CaseSpec& spec);

struct CaseReport {
  std::string id;
  std::vector<Residual> residuals;  // must be empty
  bool shapes_ok = false;           // instantiation depends only on the claimed arguments
  bool nonlinear_in_u = false;      // some of φ¹_u, φ²_u, η_uu nonzero
  bool verdict_consistent = false;  // nonlinear_in_u iff the row is L<=>N
  std::vector<std::string> probe_failures;  // probes that did not break a constraint
  std::vector<std::string> notes;
  bool passed() const { return residuals.empty() && shapes_ok && verdict_consistent && probe_failures.empty(); }
};

CaseReport verify_case(const std::string& id);

struct ClassificationResult {
  DependencySignature signature;
  std::string row_id;  // empty when uncovered
  bool exact = false;  // row matched exactly rather than inherited
  Shapes shapes;
  Verdict verdict = Verdict::uncovered;
  std::vector<std::string> witness;
  std::vector<std::string> discrepancies;
  std::vector<std::string> nearest;  // for uncovered signatures
  std::vector<std::string> notes;
};

CaseSpec case_spec(const DependencySignature& sig);
ClassificationResult classify(const DependencySignature& sig);

}  // namespace eqwave
