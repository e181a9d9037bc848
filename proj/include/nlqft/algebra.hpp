#pragma once
// Operator-algebra layer: the nonlinear form xi(f,g) = sum_i w_i (P_i[f], P_i[g])_i,
// Gram matrices with PSD certification, permanents, vacuum expectations via
// commutator rewriting, Wightman pairing sums, characteristic functions.
#include <Eigen/Dense>

#include <list>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "nlqft/functional.hpp"
#include "nlqft/grid.hpp"
#include "nlqft/kernel.hpp"
#include "nlqft/shell.hpp"
#include "nlqft/testfunction.hpp"

namespace nlqft {

struct ModelTerm {
  LocalFunctional P;
  Kernel K;
  double weight = 1.0;
};

struct NonlinearModel {
  std::vector<ModelTerm> terms;
  std::map<std::string, Rank> slots;  // named slots the functionals consume
};

// weight < 0 is rejected (sums of PSD forms must stay PSD).
NonlinearModel make_model(
    const std::vector<std::tuple<std::string, Kernel, double>>& terms,
    const std::map<std::string, Rank>& slots = {{"f", Rank::Scalar}});
// Single identity term: the free scalar field of mass m.
NonlinearModel free_scalar_model(double m);

// A binding of model slots to test functions; absent slots read as zero fields.
struct Probe {
  std::map<std::string, TestFunction> fns;
};
Probe scalar_probe(const TestFunction& f);
std::string probe_key(const Probe& p);

struct GramReport {
  Eigen::MatrixXcd matrix;
  double min_eigenvalue = 0.0;
  double hermiticity_residual = 0.0;
  double trace = 0.0;
  double tol = 1e-8;
  bool psd_certified = false;
};

struct OperatorFactor {
  enum Kind { Create, Annihilate } kind = Create;
  Probe fn;
};
struct OperatorMonomial {
  std::vector<OperatorFactor> factors;
};

struct StatePrep {
  enum Kind { Vacuum, Excited } kind = Vacuum;
  std::vector<Probe> creators;
};

// Ryser's formula with Gray-code subset enumeration, O(2^n n).
cplx permanent(const Eigen::MatrixXcd& M, int cap = 24);

class XiEvaluator {
 public:
  XiEvaluator(std::shared_ptr<const Grid> grid, NonlinearModel model);

  cplx xi(const Probe& a, const Probe& b);
  cplx xi(const TestFunction& f, const TestFunction& g);

  // phase-factor evaluation of xi(f, f_a) without re-sampling the translate
  cplx translated_autocorrelation(const Probe& f, const std::array<double, 4>& a);

  GramReport gram_psd(const std::vector<Probe>& fns, double tol = 1e-8);

  // xi(g,f) - xi(f,g)  (the value of [phi_f, phi_g] in the vacuum sector)
  cplx commutator(const Probe& f, const Probe& g);
  double commutator_normalized(const Probe& f, const Probe& g);

  // force_rewrite skips the anti-normal-order permanent shortcut
  cplx vacuum_expectation(const OperatorMonomial& mono, bool force_rewrite = false,
                          int cap = 16);

  // perfect-matching pairing sum over <0|phi_1 ... phi_n|0>
  cplx wightman(const std::vector<Probe>& fns, int cap = 12);

  cplx characteristic_function(const StatePrep& state,
                               const std::vector<Probe>& fns,
                               const std::vector<double>& lambda);

  // presize massless-shell quadrature for a batch of probes (avoids repeated
  // node-set rebuilds; called automatically by gram_psd)
  void reserve_probes(const std::vector<Probe>& fns);

  const NonlinearModel& model() const { return model_; }
  const std::shared_ptr<const Grid>& grid() const { return grid_; }
  void clear_field_caches();

 private:
  struct ZeroRep {};
  using AnyRep = std::variant<ZeroRep, RectRep, SphRep>;

  std::shared_ptr<const Grid> grid_;
  NonlinearModel model_;
  std::shared_ptr<const SphNodes> nodes_;
  bool needs_sph_ = false;

  // byte-budgeted FIFO caches for the large intermediates
  std::list<std::pair<std::string, RealField4>> sample_order_;
  std::map<std::string, std::list<std::pair<std::string, RealField4>>::iterator>
      sample_index_;
  std::size_t sample_bytes_ = 0;
  std::list<std::pair<std::string, AnyRep>> rep_order_;
  std::map<std::string, std::list<std::pair<std::string, AnyRep>>::iterator>
      rep_index_;
  std::size_t rep_bytes_ = 0;
  std::map<std::string, cplx> xi_cache_;
  std::map<Rank, RealField4> zero_fields_;

  const RealField4& sampled(const TestFunction& f);
  const RealField4& zero_field(Rank r);
  void probe_extent(const Probe& p, double& tmax, double& rmax) const;
  void ensure_nodes(double tmax, double rmax);
  const AnyRep& term_rep(const Probe& p, std::size_t term_index);
  cplx pair_terms(const Probe& a, const Probe& b, const double* shift);
  cplx rewrite_expectation(std::vector<int>& word,
                           const std::vector<Probe>& registry,
                           std::map<std::vector<int>, cplx>& memo);
};

}  // namespace nlqft
