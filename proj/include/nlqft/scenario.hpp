#pragma once
// Declarative scenario files: a sectioned plain-text key/value format.
//
//   [grid]                n_t, n_s, dt, dx, origin (= "auto" or 4 numbers)
//   [function NAME]       family = gaussian|bump; center; sigma/q or radius;
//                         rank = scalar|vector|antisym2; profile; amplitude
//   [model]               type = scalar with repeated
//                            term = FUNCTIONAL | KERNEL | WEIGHT
//                         or type = em with lambda1..lambda7, kappa1..kappa3,
//                            m_v, sigma_t, sigma_s, axial, derivative_terms,
//                            extended, lambda_deriv1, lambda_deriv2, lambda_ext
//   [probe NAME]          J = fn; S = fn; F = fn   (em models)
//   [state]               kind = vacuum | excited; creator = probe-or-function
//   [output gram]         functions = a b c; tol = 1e-8
//   [output commutator]   pairs = a:b c:d
//   [output wightman]     functions = a b a b
//   [output density]      kind = vacuum|one-particle|deformed; functions = ..;
//                         creator = ..; g = identity|xtanh; variance-from = fn;
//                         min, max, points (1D slice in the first coordinate)
//   [output sweep]        function = a; direction = 4 numbers; steps; step
//   [output characteristic] functions = a; lambda_min, lambda_max, points
//
// Kernel specs: scalar(m=1) | vector(m=1,sigma_t=1,sigma_s=0.5) | em
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "nlqft/algebra.hpp"
#include "nlqft/em.hpp"

namespace nlqft {

// scenario/usage errors -> exit code 2
struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// numerical failures (PSD violation, singular geometry) -> exit code 3
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RawSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> kv;
};

std::vector<RawSection> parse_raw_sections(std::istream& in);
// override syntax: "section.key=value" (first matching key replaced or added)
void apply_override(std::vector<RawSection>& sections, const std::string& ov);

Kernel parse_kernel_spec(const std::string& text);

struct ScenarioOutput {
  std::string kind;
  std::map<std::string, std::string> kv;
};

struct Scenario {
  GridSpec grid;
  std::map<std::string, TestFunction> functions;
  bool is_em = false;
  NonlinearModel model;
  std::map<std::string, Probe> probes;  // named probes plus auto scalar probes
  StatePrep state;
  std::vector<ScenarioOutput> outputs;
  double tol = 1e-8;
  std::string source_text;  // raw file content (hashed into the manifest)
};

Scenario build_scenario(const std::vector<RawSection>& sections,
                        const std::string& source_text);
Scenario load_scenario(const std::string& path,
                       const std::vector<std::string>& overrides = {});

// Executes every requested output; writes one CSV per table plus
// manifest.json into out_dir. `only` restricts to one output kind (empty =
// all). Returns the process exit code (0 ok, 3 numerical failure).
int run_scenario(const Scenario& sc, const std::string& out_dir,
                 const std::string& only = "", bool with_oracle = false);

}  // namespace nlqft
