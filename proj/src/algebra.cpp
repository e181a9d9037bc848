#include "nlqft/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nlqft {

NonlinearModel make_model(
    const std::vector<std::tuple<std::string, Kernel, double>>& terms,
    const std::map<std::string, Rank>& slots) {
  if (terms.empty()) throw std::invalid_argument("model needs at least one term");
  NonlinearModel m;
  m.slots = slots;
  for (const auto& [text, kernel, weight] : terms) {
    if (!(weight >= 0.0))
      throw std::invalid_argument("model weights must be >= 0");
    ModelTerm t;
    t.P = parse_functional(text, slots);
    t.K = kernel;
    t.weight = weight;
    if (t.P.out_rank != kernel_rank(kernel))
      throw std::invalid_argument("functional rank does not match kernel rank: " +
                                  text);
    for (const auto& s : t.P.slots)
      if (!slots.count(s))
        throw std::invalid_argument("functional uses undeclared slot '" + s + "'");
    m.terms.push_back(std::move(t));
  }
  return m;
}

NonlinearModel free_scalar_model(double m) {
  return make_model({{"f", make_scalar_kernel(m), 1.0}});
}

Probe scalar_probe(const TestFunction& f) {
  Probe p;
  p.fns.emplace("f", f);
  return p;
}

std::string probe_key(const Probe& p) {
  std::string out;
  for (const auto& [name, fn] : p.fns) {
    out += name;
    out += "=";
    out += content_key(fn);
    out += ";";
  }
  return out;
}

// ---------------- permanent (Ryser, Gray code) ----------------

cplx permanent(const Eigen::MatrixXcd& M, int cap) {
  const int n = int(M.rows());
  if (M.cols() != n) throw std::invalid_argument("permanent needs a square matrix");
  if (n > cap) throw std::invalid_argument("permanent dimension exceeds cap");
  if (n == 0) return cplx(1.0);
  std::vector<cplx> rowsum(n, cplx(0.0));
  cplx total(0.0);
  std::uint64_t prev_gray = 0;
  const std::uint64_t count = std::uint64_t(1) << n;
  for (std::uint64_t k = 1; k < count; ++k) {
    std::uint64_t gray = k ^ (k >> 1);
    std::uint64_t diff = gray ^ prev_gray;
    int j = __builtin_ctzll(diff);
    double add = (gray & diff) ? 1.0 : -1.0;
    for (int i = 0; i < n; ++i) rowsum[i] += add * M(i, j);
    cplx prod(1.0);
    for (int i = 0; i < n; ++i) prod *= rowsum[i];
    int popcnt = __builtin_popcountll(gray);
    double sign = ((n - popcnt) % 2) ? -1.0 : 1.0;
    total += sign * prod;
    prev_gray = gray;
  }
  return total;
}

// ---------------- XiEvaluator ----------------

namespace {
constexpr std::size_t kSampleBudget = std::size_t(1600) << 20;
constexpr std::size_t kRepBudget = std::size_t(1600) << 20;
}  // namespace

XiEvaluator::XiEvaluator(std::shared_ptr<const Grid> grid, NonlinearModel model)
    : grid_(std::move(grid)), model_(std::move(model)) {
  for (const auto& t : model_.terms)
    if (t.K.kind == Kernel::EMTensor ||
        (t.K.kind == Kernel::ScalarMass && t.K.m == 0.0))
      needs_sph_ = true;
}

void XiEvaluator::clear_field_caches() {
  sample_order_.clear();
  sample_index_.clear();
  sample_bytes_ = 0;
  rep_order_.clear();
  rep_index_.clear();
  rep_bytes_ = 0;
}

const RealField4& XiEvaluator::sampled(const TestFunction& f) {
  std::string key = content_key(f);
  auto it = sample_index_.find(key);
  if (it != sample_index_.end()) return it->second->second;
  RealField4 field = sample(f, grid_);
  sample_bytes_ += field.data.size() * sizeof(double);
  sample_order_.emplace_back(key, std::move(field));
  sample_index_[key] = std::prev(sample_order_.end());
  while (sample_bytes_ > kSampleBudget && sample_order_.size() > 4) {
    sample_bytes_ -= sample_order_.front().second.data.size() * sizeof(double);
    sample_index_.erase(sample_order_.front().first);
    sample_order_.pop_front();
  }
  return sample_index_[key]->second;
}

const RealField4& XiEvaluator::zero_field(Rank r) {
  auto it = zero_fields_.find(r);
  if (it == zero_fields_.end())
    it = zero_fields_.emplace(r, make_real_field(grid_, component_count(r))).first;
  return it->second;
}

void XiEvaluator::probe_extent(const Probe& p, double& tmax, double& rmax) const {
  const Grid& g = *grid_;
  const GridSpec& s = g.spec;
  double box_t = std::max(std::abs(g.t.front()), std::abs(g.t.back()));
  double box_r2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    double e = std::max(std::abs(g.x[a].front()), std::abs(g.x[a].back()));
    box_r2 += e * e;
  }
  double box_r = std::sqrt(box_r2);
  tmax = 0.0;
  rmax = 0.0;
  for (const auto& [name, fn] : p.fns) {
    Support sup = support_of(fn);
    double t, r;
    if (sup.bounded) {
      t = std::abs(sup.center[0]) + sup.radius;
      double c2 = sup.center[1] * sup.center[1] + sup.center[2] * sup.center[2] +
                  sup.center[3] * sup.center[3];
      r = std::sqrt(c2) + sup.radius;
    } else {
      t = box_t;
      r = box_r;
    }
    // derivative stencils enlarge discrete support by one cell
    double margin = 2.0 * std::max(s.dt, s.dx);
    tmax = std::max(tmax, std::min(t + margin, box_t));
    rmax = std::max(rmax, std::min(r + margin, box_r));
  }
}

void XiEvaluator::ensure_nodes(double tmax, double rmax) {
  if (nodes_ && nodes_->extent_t >= tmax - 1e-12 &&
      nodes_->extent_r >= rmax - 1e-12)
    return;
  if (nodes_) {
    tmax = std::max(tmax, nodes_->extent_t);
    rmax = std::max(rmax, nodes_->extent_r);
  }
  nodes_ = make_sph_nodes(*grid_, rmax, tmax);
  // spherical reps are tied to the node set; drop them
  for (auto it = rep_order_.begin(); it != rep_order_.end();) {
    if (std::holds_alternative<SphRep>(it->second)) {
      rep_bytes_ -= std::get<SphRep>(it->second).vals.size() * sizeof(cplx);
      rep_index_.erase(it->first);
      it = rep_order_.erase(it);
    } else {
      ++it;
    }
  }
}

void XiEvaluator::reserve_probes(const std::vector<Probe>& fns) {
  if (!needs_sph_) return;
  double tmax = 0.0, rmax = 0.0;
  for (const auto& p : fns) {
    double t, r;
    probe_extent(p, t, r);
    tmax = std::max(tmax, t);
    rmax = std::max(rmax, r);
  }
  ensure_nodes(tmax, rmax);
}

const XiEvaluator::AnyRep& XiEvaluator::term_rep(const Probe& p,
                                                 std::size_t term_index) {
  const ModelTerm& term = model_.terms[term_index];
  bool sph = term.K.kind == Kernel::EMTensor ||
             (term.K.kind == Kernel::ScalarMass && term.K.m == 0.0);
  std::string key = probe_key(p) + "|t" + std::to_string(term_index);
  if (sph) key += "|n" + std::to_string(nodes_ ? nodes_->id : 0);
  auto it = rep_index_.find(key);
  if (it != rep_index_.end()) return it->second->second;

  // all slots the functional reads absent -> the term contributes zero
  bool any_bound = false;
  for (const auto& s : term.P.slots)
    if (p.fns.count(s)) any_bound = true;
  AnyRep rep;
  if (!any_bound) {
    rep = ZeroRep{};
  } else {
    std::map<std::string, const RealField4*> bindings;
    for (const auto& s : term.P.slots) {
      auto fit = p.fns.find(s);
      Rank want = model_.slots.at(s);
      if (fit == p.fns.end()) {
        bindings[s] = &zero_field(want);
      } else {
        if (fit->second.rank != want)
          throw std::invalid_argument("probe rank mismatch for slot '" + s + "'");
        bindings[s] = &sampled(fit->second);
      }
    }
    RealField4 out = eval_functional(term.P, bindings);
    if (sph) {
      if (!nodes_) {
        double t, r;
        probe_extent(p, t, r);
        ensure_nodes(t, r);
      }
      rep = reduce_sph(out, nodes_);
    } else {
      rep = reduce_rect(out, term.K.m);
    }
  }
  std::size_t bytes = 0;
  if (auto* rr = std::get_if<RectRep>(&rep))
    bytes = rr->vals.size() * sizeof(cplx) + rr->omega.size() * 9;
  else if (auto* sr = std::get_if<SphRep>(&rep))
    bytes = sr->vals.size() * sizeof(cplx);
  rep_bytes_ += bytes;
  rep_order_.emplace_back(key, std::move(rep));
  rep_index_[key] = std::prev(rep_order_.end());
  while (rep_bytes_ > kRepBudget && rep_order_.size() > 4) {
    const AnyRep& front = rep_order_.front().second;
    std::size_t fb = 0;
    if (auto* rr = std::get_if<RectRep>(&front))
      fb = rr->vals.size() * sizeof(cplx) + rr->omega.size() * 9;
    else if (auto* sr = std::get_if<SphRep>(&front))
      fb = sr->vals.size() * sizeof(cplx);
    rep_bytes_ -= fb;
    rep_index_.erase(rep_order_.front().first);
    rep_order_.pop_front();
  }
  return rep_index_[key]->second;
}

cplx XiEvaluator::pair_terms(const Probe& a, const Probe& b, const double* shift) {
  if (needs_sph_) {
    double ta, ra, tb, rb;
    probe_extent(a, ta, ra);
    probe_extent(b, tb, rb);
    ensure_nodes(std::max(ta, tb), std::max(ra, rb));
  }
  cplx total(0.0);
  for (std::size_t i = 0; i < model_.terms.size(); ++i) {
    // copy-free references: evaluate A first, but guard against the rep cache
    // evicting it while B is built by taking values in a second pass
    AnyRep ra = term_rep(a, i);  // copies are cheap relative to recompute
    const AnyRep& rb = term_rep(b, i);
    cplx v(0.0);
    if (std::holds_alternative<ZeroRep>(ra) || std::holds_alternative<ZeroRep>(rb)) {
      v = cplx(0.0);
    } else if (std::holds_alternative<RectRep>(ra)) {
      v = contract(model_.terms[i].K, std::get<RectRep>(ra), std::get<RectRep>(rb),
                   shift)
              .value;
    } else {
      v = contract(model_.terms[i].K, std::get<SphRep>(ra), std::get<SphRep>(rb),
                   shift)
              .value;
    }
    total += model_.terms[i].weight * v;
  }
  return total;
}

cplx XiEvaluator::xi(const Probe& a, const Probe& b) {
  std::string key = probe_key(a) + "\x1f" + probe_key(b);
  auto it = xi_cache_.find(key);
  if (it != xi_cache_.end()) return it->second;
  cplx v = pair_terms(a, b, nullptr);
  xi_cache_[key] = v;
  return v;
}

cplx XiEvaluator::xi(const TestFunction& f, const TestFunction& g) {
  return xi(scalar_probe(f), scalar_probe(g));
}

cplx XiEvaluator::translated_autocorrelation(const Probe& f,
                                             const std::array<double, 4>& a) {
  return pair_terms(f, f, a.data());
}

GramReport XiEvaluator::gram_psd(const std::vector<Probe>& fns, double tol) {
  const int n = int(fns.size());
  if (n < 1) throw std::invalid_argument("gram needs at least one function");
  reserve_probes(fns);
  GramReport rep;
  rep.tol = tol;
  rep.matrix.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rep.matrix(i, j) = xi(fns[i], fns[j]);
  rep.hermiticity_residual =
      (rep.matrix - rep.matrix.adjoint()).cwiseAbs().maxCoeff();
  Eigen::MatrixXcd H = 0.5 * (rep.matrix + rep.matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  rep.trace = H.trace().real();
  rep.psd_certified = rep.min_eigenvalue >= -tol * std::abs(rep.trace);
  return rep;
}

cplx XiEvaluator::commutator(const Probe& f, const Probe& g) {
  return xi(g, f) - xi(f, g);
}

double XiEvaluator::commutator_normalized(const Probe& f, const Probe& g) {
  cplx c = commutator(f, g);
  double nf = xi(f, f).real(), ng = xi(g, g).real();
  double denom = std::sqrt(std::abs(nf) * std::abs(ng));
  if (denom == 0.0) return 0.0;
  return std::abs(c) / denom;
}

// ---------------- vacuum expectations ----------------

cplx XiEvaluator::rewrite_expectation(std::vector<int>& word,
                                      const std::vector<Probe>& registry,
                                      std::map<std::vector<int>, cplx>& memo) {
  // encoding: id = 2*probe_index + (1 if creation)
  auto mit = memo.find(word);
  if (mit != memo.end()) return mit->second;
  int swap_at = -1;
  for (std::size_t i = 0; i + 1 < word.size(); ++i) {
    if (word[i] % 2 == 0 && word[i + 1] % 2 == 1) {
      swap_at = int(i);
      break;
    }
  }
  cplx out;
  if (swap_at < 0) {
    // normal ordered (creators then annihilators): kills the vacuum unless empty
    out = word.empty() ? cplx(1.0) : cplx(0.0);
  } else {
    const Probe& f = registry[word[swap_at] / 2];      // annihilator
    const Probe& g = registry[word[swap_at + 1] / 2];  // creator
    std::vector<int> swapped = word;
    std::swap(swapped[swap_at], swapped[swap_at + 1]);
    std::vector<int> contracted = word;
    contracted.erase(contracted.begin() + swap_at, contracted.begin() + swap_at + 2);
    out = rewrite_expectation(swapped, registry, memo) +
          xi(g, f) * rewrite_expectation(contracted, registry, memo);
  }
  memo[word] = out;
  return out;
}

cplx XiEvaluator::vacuum_expectation(const OperatorMonomial& mono,
                                     bool force_rewrite, int cap) {
  if (int(mono.factors.size()) > cap)
    throw std::invalid_argument("operator monomial exceeds length cap");
  std::vector<Probe> registry;
  std::vector<int> word;
  for (const auto& f : mono.factors) {
    registry.push_back(f.fn);
    word.push_back(2 * int(registry.size() - 1) +
                   (f.kind == OperatorFactor::Create ? 1 : 0));
  }
  if (!force_rewrite) {
    // anti-normal order a_f1..a_fK a+_g1..a+_gJ: delta_{J,K} per[xi(g_j,f_k)]
    std::size_t split = 0;
    while (split < word.size() && word[split] % 2 == 0) ++split;
    bool anti_normal = true;
    for (std::size_t i = split; i < word.size(); ++i)
      if (word[i] % 2 == 0) anti_normal = false;
    if (anti_normal) {
      std::size_t k = split, j = word.size() - split;
      if (j != k) return cplx(0.0);
      const int n = int(k);
      Eigen::MatrixXcd M(n, n);
      for (int jj = 0; jj < n; ++jj)
        for (int kk = 0; kk < n; ++kk)
          M(jj, kk) = xi(registry[word[split + jj] / 2], registry[word[kk] / 2]);
      return permanent(M);
    }
  }
  std::map<std::vector<int>, cplx> memo;
  return rewrite_expectation(word, registry, memo);
}

namespace {
cplx pairing_sum(const std::vector<int>& idx, const Eigen::MatrixXcd& X) {
  if (idx.empty()) return cplx(1.0);
  int i0 = idx[0];
  cplx total(0.0);
  for (std::size_t j = 1; j < idx.size(); ++j) {
    std::vector<int> rest;
    rest.reserve(idx.size() - 2);
    for (std::size_t k = 1; k < idx.size(); ++k)
      if (k != j) rest.push_back(idx[k]);
    // contraction <0| phi_i phi_j |0> = xi(f_j, f_i) for i < j
    total += X(idx[j], i0) * pairing_sum(rest, X);
  }
  return total;
}
}  // namespace

cplx XiEvaluator::wightman(const std::vector<Probe>& fns, int cap) {
  const int n = int(fns.size());
  if (n > cap) throw std::invalid_argument("wightman order exceeds cap");
  if (n % 2 == 1) return cplx(0.0);
  if (n == 0) return cplx(1.0);
  Eigen::MatrixXcd X(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) X(i, j) = xi(fns[i], fns[j]);
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  return pairing_sum(idx, X);
}

cplx XiEvaluator::characteristic_function(const StatePrep& state,
                                          const std::vector<Probe>& fns,
                                          const std::vector<double>& lambda) {
  const int n = int(fns.size());
  if (int(lambda.size()) != n)
    throw std::invalid_argument("lambda dimension mismatch");
  Eigen::MatrixXd F(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) F(i, j) = xi(fns[i], fns[j]).real();
  double quad = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) quad += lambda[i] * F(i, j) * lambda[j];
  cplx gauss = std::exp(-0.5 * quad);
  if (state.kind == StatePrep::Vacuum) return gauss;
  if (state.creators.size() != 1)
    throw std::invalid_argument(
        "characteristic function is available for single-creator states only");
  const Probe& g = state.creators[0];
  double norm = xi(g, g).real();
  if (!(norm > 0.0)) throw std::runtime_error("null state direction");
  cplx ls(0.0);
  for (int i = 0; i < n; ++i)
    ls += lambda[i] * xi(fns[i], g) / std::sqrt(norm);
  return (1.0 - std::norm(ls)) * gauss;
}

}  // namespace nlqft
