#include "nlqft/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nlqft/csvio.hpp"
#include "nlqft/densities.hpp"

namespace nlqft {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& tok : split_ws(s)) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      throw ScenarioError(std::string("bad number in ") + what + ": " + tok);
    out.push_back(v);
  }
  return out;
}

double parse_one_double(const std::string& s, const char* what) {
  auto v = parse_doubles(s, what);
  if (v.size() != 1)
    throw ScenarioError(std::string("expected one number for ") + what);
  return v[0];
}

bool parse_bool(const std::string& s) {
  return s == "true" || s == "1" || s == "yes" || s == "on";
}

const std::string* find_kv(const RawSection& sec, const std::string& key) {
  for (const auto& [k, v] : sec.kv)
    if (k == key) return &v;
  return nullptr;
}

std::string get_kv(const RawSection& sec, const std::string& key,
                   const std::string& fallback) {
  const std::string* v = find_kv(sec, key);
  return v ? *v : fallback;
}

std::string need_kv(const RawSection& sec, const std::string& key) {
  const std::string* v = find_kv(sec, key);
  if (!v)
    throw ScenarioError("section [" + sec.name + "] is missing key '" + key + "'");
  return *v;
}

}  // namespace

std::vector<RawSection> parse_raw_sections(std::istream& in) {
  std::vector<RawSection> out;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ScenarioError("malformed section header: " + line);
      out.push_back(RawSection{trim(line.substr(1, line.size() - 2)), {}});
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ScenarioError("expected key = value: " + line);
    if (out.empty()) throw ScenarioError("key/value before any [section]");
    out.back().kv.emplace_back(trim(line.substr(0, eq)),
                               trim(line.substr(eq + 1)));
  }
  return out;
}

void apply_override(std::vector<RawSection>& sections, const std::string& ov) {
  std::size_t eq = ov.find('=');
  if (eq == std::string::npos)
    throw ScenarioError("override must be section.key=value: " + ov);
  std::string lhs = trim(ov.substr(0, eq));
  std::string value = trim(ov.substr(eq + 1));
  std::size_t dot = lhs.rfind('.');
  if (dot == std::string::npos)
    throw ScenarioError("override must be section.key=value: " + ov);
  std::string sec = lhs.substr(0, dot), key = lhs.substr(dot + 1);
  for (auto& s : sections) {
    if (s.name != sec) continue;
    for (auto& [k, v] : s.kv)
      if (k == key) {
        v = value;
        return;
      }
    s.kv.emplace_back(key, value);
    return;
  }
  throw ScenarioError("override names unknown section [" + sec + "]");
}

Kernel parse_kernel_spec(const std::string& text) {
  std::string s = trim(text);
  if (s == "em") return make_em_kernel();
  auto paren = s.find('(');
  if (paren == std::string::npos || s.back() != ')')
    throw ScenarioError("bad kernel spec: " + text);
  std::string name = trim(s.substr(0, paren));
  std::string args = s.substr(paren + 1, s.size() - paren - 2);
  std::map<std::string, double> kv;
  std::istringstream in(args);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ScenarioError("bad kernel argument: " + item);
    kv[trim(item.substr(0, eq))] =
        parse_one_double(trim(item.substr(eq + 1)), "kernel argument");
  }
  auto get = [&](const char* k, double dflt) {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second;
  };
  try {
    if (name == "scalar") return make_scalar_kernel(get("m", 1.0));
    if (name == "vector")
      return make_vector_kernel(get("m", 1.0), get("sigma_t", 1.0),
                                get("sigma_s", 0.0));
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("bad kernel parameters: ") + e.what());
  }
  throw ScenarioError("unknown kernel '" + name + "'");
}

namespace {

TestFunction build_function(const RawSection& sec) {
  std::string family = get_kv(sec, "family", "gaussian");
  auto center_v = parse_doubles(get_kv(sec, "center", "0 0 0 0"), "center");
  if (center_v.size() != 4) throw ScenarioError("center needs 4 numbers");
  std::array<double, 4> center = {center_v[0], center_v[1], center_v[2],
                                  center_v[3]};
  std::string rank_s = get_kv(sec, "rank", "scalar");
  Rank rank = rank_s == "scalar"     ? Rank::Scalar
              : rank_s == "vector"   ? Rank::Vector
              : rank_s == "antisym2" ? Rank::Antisym2
                                     : throw ScenarioError("bad rank: " + rank_s);
  std::array<double, 6> profile = {{1, 0, 0, 0, 0, 0}};
  if (const std::string* p = find_kv(sec, "profile")) {
    auto pv = parse_doubles(*p, "profile");
    if (int(pv.size()) != component_count(rank))
      throw ScenarioError("profile length must match rank");
    profile.fill(0.0);
    for (std::size_t i = 0; i < pv.size(); ++i) profile[i] = pv[i];
  }
  TestFunction f;
  try {
    if (family == "gaussian") {
      auto qv = parse_doubles(get_kv(sec, "q", "0 0 0 0"), "q");
      if (qv.size() != 4) throw ScenarioError("q needs 4 numbers");
      f = gaussian_packet(center,
                          parse_one_double(get_kv(sec, "sigma", "1"), "sigma"),
                          {qv[0], qv[1], qv[2], qv[3]}, rank, profile);
    } else if (family == "bump") {
      f = bump(center, parse_one_double(get_kv(sec, "radius", "1"), "radius"),
               rank, profile);
    } else {
      throw ScenarioError("unknown function family: " + family);
    }
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("bad function parameters: ") + e.what());
  }
  if (const std::string* a = find_kv(sec, "amplitude"))
    f = scale(f, parse_one_double(*a, "amplitude"));
  return f;
}

}  // namespace

Scenario build_scenario(const std::vector<RawSection>& sections,
                        const std::string& source_text) {
  Scenario sc;
  sc.source_text = source_text;
  const RawSection* model_sec = nullptr;
  const RawSection* state_sec = nullptr;
  bool have_grid = false;

  for (const auto& sec : sections) {
    if (sec.name == "grid") {
      sc.grid.n_t = int(parse_one_double(need_kv(sec, "n_t"), "n_t"));
      sc.grid.n_s = int(parse_one_double(need_kv(sec, "n_s"), "n_s"));
      sc.grid.dt = parse_one_double(need_kv(sec, "dt"), "dt");
      sc.grid.dx = parse_one_double(need_kv(sec, "dx"), "dx");
      std::string origin = get_kv(sec, "origin", "auto");
      if (origin == "auto") {
        sc.grid.origin = {-sc.grid.n_t * sc.grid.dt / 2,
                          -sc.grid.n_s * sc.grid.dx / 2,
                          -sc.grid.n_s * sc.grid.dx / 2,
                          -sc.grid.n_s * sc.grid.dx / 2};
      } else {
        auto ov = parse_doubles(origin, "origin");
        if (ov.size() != 4) throw ScenarioError("origin needs 4 numbers or auto");
        sc.grid.origin = {ov[0], ov[1], ov[2], ov[3]};
      }
      have_grid = true;
    } else if (sec.name.rfind("function ", 0) == 0) {
      std::string name = trim(sec.name.substr(9));
      if (name.empty()) throw ScenarioError("function section needs a name");
      sc.functions[name] = build_function(sec);
    } else if (sec.name == "model") {
      model_sec = &sec;
    } else if (sec.name == "state") {
      state_sec = &sec;
    } else if (sec.name.rfind("output ", 0) == 0) {
      ScenarioOutput out;
      out.kind = trim(sec.name.substr(7));
      for (const auto& [k, v] : sec.kv) out.kv[k] = v;
      sc.outputs.push_back(std::move(out));
    } else if (sec.name.rfind("probe ", 0) == 0) {
      // resolved after functions/model below; stored via kv pass later
    } else {
      throw ScenarioError("unknown section [" + sec.name + "]");
    }
  }
  if (!have_grid) throw ScenarioError("missing [grid] section");
  if (!model_sec) throw ScenarioError("missing [model] section");
  try {
    validate(sc.grid);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("bad grid: ") + e.what());
  }

  // model
  std::string type = get_kv(*model_sec, "type", "scalar");
  if (type == "scalar") {
    std::vector<std::tuple<std::string, Kernel, double>> terms;
    std::map<std::string, Rank> slots;
    for (const auto& [k, v] : model_sec->kv) {
      if (k != "term") continue;
      std::istringstream in(v);
      std::string ftext, ktext, wtext;
      if (!std::getline(in, ftext, '|') || !std::getline(in, ktext, '|') ||
          !std::getline(in, wtext))
        throw ScenarioError("term must be FUNCTIONAL | KERNEL | WEIGHT: " + v);
      LocalFunctional probe_parse;
      try {
        probe_parse = parse_functional(trim(ftext));
      } catch (const std::invalid_argument& e) {
        throw ScenarioError(std::string("bad functional: ") + e.what());
      }
      for (const auto& s : probe_parse.slots) slots.emplace(s, Rank::Scalar);
      terms.emplace_back(trim(ftext), parse_kernel_spec(trim(ktext)),
                         parse_one_double(trim(wtext), "term weight"));
    }
    if (terms.empty()) throw ScenarioError("scalar model needs at least one term");
    try {
      sc.model = make_model(terms, slots);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(std::string("bad model: ") + e.what());
    }
  } else if (type == "em") {
    sc.is_em = true;
    EMModelParams p;
    auto num = [&](const char* key, double dflt) {
      const std::string* v = find_kv(*model_sec, key);
      return v ? parse_one_double(*v, key) : dflt;
    };
    p.lambda1 = num("lambda1", 0);
    p.lambda2 = num("lambda2", 0);
    p.lambda3 = num("lambda3", 0);
    p.lambda4 = num("lambda4", 0);
    p.lambda5 = num("lambda5", 0);
    p.lambda6 = num("lambda6", 0);
    p.lambda7 = num("lambda7", 0);
    p.kappa1 = num("kappa1", 1);
    p.kappa2 = num("kappa2", 1);
    p.kappa3 = num("kappa3", 1);
    p.mV = num("m_v", 1);
    p.sigma_t = num("sigma_t", 1);
    p.sigma_s = num("sigma_s", 0.5);
    p.lambda_deriv1 = num("lambda_deriv1", 0);
    p.lambda_deriv2 = num("lambda_deriv2", 0);
    p.lambda_ext = num("lambda_ext", 0);
    bool axial = parse_bool(get_kv(*model_sec, "axial", "false"));
    bool deriv = parse_bool(get_kv(*model_sec, "derivative_terms", "false"));
    bool ext = parse_bool(get_kv(*model_sec, "extended", "false"));
    try {
      sc.model = build_em_model(p, axial, deriv, ext);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(std::string("bad em model: ") + e.what());
    }
  } else {
    throw ScenarioError("unknown model type: " + type);
  }

  // probes: named sections, plus automatic single-slot probes
  for (const auto& sec : sections) {
    if (sec.name.rfind("probe ", 0) != 0) continue;
    std::string name = trim(sec.name.substr(6));
    Probe p;
    for (const auto& [slot, fname] : sec.kv) {
      if (!sc.model.slots.count(slot))
        throw ScenarioError("probe '" + name + "' binds unknown slot '" + slot +
                            "'");
      auto fit = sc.functions.find(fname);
      if (fit == sc.functions.end())
        throw ScenarioError("probe '" + name + "' references unknown function '" +
                            fname + "'");
      if (fit->second.rank != sc.model.slots.at(slot))
        throw ScenarioError("probe '" + name + "': function '" + fname +
                            "' has the wrong rank for slot '" + slot + "'");
      p.fns.emplace(slot, fit->second);
    }
    if (p.fns.empty()) throw ScenarioError("probe '" + name + "' is empty");
    sc.probes[name] = std::move(p);
  }
  if (sc.model.slots.size() == 1) {
    const std::string& slot = sc.model.slots.begin()->first;
    for (const auto& [name, fn] : sc.functions) {
      if (sc.probes.count(name)) continue;
      if (fn.rank != sc.model.slots.begin()->second) continue;
      Probe p;
      p.fns.emplace(slot, fn);
      sc.probes[name] = std::move(p);
    }
  }

  // state
  sc.state.kind = StatePrep::Vacuum;
  if (state_sec) {
    std::string kind = get_kv(*state_sec, "kind", "vacuum");
    if (kind == "excited") {
      sc.state.kind = StatePrep::Excited;
      std::string creator = need_kv(*state_sec, "creator");
      auto it = sc.probes.find(creator);
      if (it == sc.probes.end())
        throw ScenarioError("state creator references unknown probe '" + creator +
                            "'");
      sc.state.creators.push_back(it->second);
    } else if (kind != "vacuum") {
      throw ScenarioError("unknown state kind: " + kind);
    }
  }
  for (const auto& out : sc.outputs) {
    static const std::set<std::string> kinds = {
        "gram", "commutator", "wightman", "density", "sweep", "characteristic"};
    if (!kinds.count(out.kind))
      throw ScenarioError("unknown output kind '" + out.kind + "'");
  }
  return sc;
}

Scenario load_scenario(const std::string& path,
                       const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  std::istringstream body(text);
  auto sections = parse_raw_sections(body);
  for (const auto& ov : overrides) apply_override(sections, ov);
  return build_scenario(sections, text);
}

// ---------------- execution ----------------

namespace {

const Probe& resolve_probe(const Scenario& sc, const std::string& name) {
  auto it = sc.probes.find(name);
  if (it == sc.probes.end())
    throw ScenarioError("unknown function/probe '" + name + "'");
  return it->second;
}

Probe translate_probe(const Probe& p, const std::array<double, 4>& a) {
  Probe out;
  for (const auto& [slot, fn] : p.fns) out.fns.emplace(slot, translate(fn, a));
  return out;
}

CausalRelation probe_causal(const Probe& a, const Probe& b) {
  CausalRelation worst;
  worst.relation = Causal::SpacelikeSeparated;
  worst.margin = -std::numeric_limits<double>::infinity();
  for (const auto& [sa, fa] : a.fns)
    for (const auto& [sb, fb] : b.fns) {
      CausalRelation r = causal_relation(fa, fb);
      if (r.relation == Causal::Indeterminate) return r;
      if (r.margin > worst.margin) worst = r;
    }
  return worst;
}

std::vector<std::string> base_comments(const Scenario& sc,
                                       const std::string& kind) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                (unsigned long long)fnv1a(sc.source_text));
  return {std::string("conventions: ") + kConventions,
          "scenario-hash: " + std::string(hash), "output: " + kind};
}

std::string fmt_cplx_re(cplx v) { return format_sci(v.real()); }
std::string fmt_cplx_im(cplx v) { return format_sci(v.imag()); }

}  // namespace

int run_scenario(const Scenario& sc, const std::string& out_dir,
                 const std::string& only, bool with_oracle) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto grid = make_grid(sc.grid);
  XiEvaluator ev(grid, sc.model);
  nlohmann::json manifest;
  {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  (unsigned long long)fnv1a(sc.source_text));
    manifest["scenario_hash"] = hash;
  }
  manifest["conventions"] = kConventions;
  manifest["grid"] = {{"n_t", sc.grid.n_t}, {"n_s", sc.grid.n_s},
                      {"dt", sc.grid.dt},   {"dx", sc.grid.dx},
                      {"origin", sc.grid.origin}};

  // grid diagnostics: boundary leakage per function, shell-band coverage per
  // massive kernel
  nlohmann::json leak = nlohmann::json::object();
  for (const auto& [name, fn] : sc.functions)
    leak[name] = boundary_leakage(sample(fn, grid));
  manifest["boundary_leakage"] = leak;
  nlohmann::json coverage = nlohmann::json::object();
  for (const auto& term : sc.model.terms) {
    if (term.K.kind == Kernel::EMTensor || term.K.m == 0.0) continue;
    std::size_t dropped = 0, total = 0;
    double nyq = M_PI / sc.grid.dt;
    for (int ix = 0; ix < sc.grid.n_s; ++ix)
      for (int iy = 0; iy < sc.grid.n_s; ++iy)
        for (int iz = 0; iz < sc.grid.n_s; ++iz) {
          double k2 = grid->ks[ix] * grid->ks[ix] + grid->ks[iy] * grid->ks[iy] +
                      grid->ks[iz] * grid->ks[iz];
          ++total;
          if (std::sqrt(k2 + term.K.m * term.K.m) > nyq * (1.0 + 1e-12))
            ++dropped;
        }
    coverage[kernel_key(term.K)] = double(dropped) / double(total);
  }
  manifest["shell_dropped_fraction"] = coverage;
  manifest["outputs"] = nlohmann::json::array();

  int exit_code = 0;
  auto record = [&](const std::string& kind, const std::string& file) {
    manifest["outputs"].push_back({{"kind", kind}, {"file", file}});
  };

  std::vector<ScenarioOutput> outputs = sc.outputs;
  if (only == "check") {
    outputs.clear();  // diagnostics plus a PSD check over every probe
    ScenarioOutput g;
    g.kind = "gram";
    std::string all;
    for (const auto& [name, p] : sc.probes) {
      (void)p;
      all += name + " ";
    }
    g.kv["functions"] = all;
    outputs.push_back(g);
  } else if (!only.empty()) {
    std::erase_if(outputs, [&](const ScenarioOutput& o) { return o.kind != only; });
    if (outputs.empty())
      throw ScenarioError("scenario has no [output " + only + "] section");
  }

  int file_index = 0;
  try {
    for (const auto& out : outputs) {
      std::string file = std::to_string(file_index++) + "_" + out.kind + ".csv";
      std::string path = (fs::path(out_dir) / file).string();
      auto get = [&](const std::string& k, const std::string& dflt) {
        auto it = out.kv.find(k);
        return it == out.kv.end() ? dflt : it->second;
      };
      auto need = [&](const std::string& k) {
        auto it = out.kv.find(k);
        if (it == out.kv.end())
          throw ScenarioError("[output " + out.kind + "] is missing key '" + k +
                              "'");
        return it->second;
      };

      if (out.kind == "gram") {
        auto names = split_ws(need("functions"));
        if (names.empty()) throw ScenarioError("gram needs functions");
        double tol = out.kv.count("tol")
                         ? parse_one_double(out.kv.at("tol"), "tol")
                         : sc.tol;
        std::vector<Probe> probes;
        for (const auto& n : names) probes.push_back(resolve_probe(sc, n));
        GramReport rep = ev.gram_psd(probes, tol);
        CsvTable t;
        t.comments = base_comments(sc, "gram");
        t.comments.push_back("min_eigenvalue: " + format_sci(rep.min_eigenvalue));
        t.comments.push_back("trace: " + format_sci(rep.trace));
        t.comments.push_back("hermiticity_residual: " +
                             format_sci(rep.hermiticity_residual));
        t.comments.push_back(std::string("psd_certified: ") +
                             (rep.psd_certified ? "true" : "false"));
        t.columns = {"i", "j", "re", "im"};
        for (int i = 0; i < rep.matrix.rows(); ++i)
          for (int j = 0; j < rep.matrix.cols(); ++j)
            t.rows.push_back({std::to_string(i), std::to_string(j),
                              fmt_cplx_re(rep.matrix(i, j)),
                              fmt_cplx_im(rep.matrix(i, j))});
        write_csv(path, t);
        record(out.kind, file);
        if (!rep.psd_certified) {
          manifest["error"] = "PSD violation in gram output";
          exit_code = 3;
        }
      } else if (out.kind == "commutator") {
        auto pairs = split_ws(need("pairs"));
        CsvTable t;
        t.comments = base_comments(sc, "commutator");
        t.columns = {"pair", "a",  "b",      "re",
                     "im",   "normalized", "margin", "spacelike"};
        int idx = 0;
        for (const auto& pr : pairs) {
          auto colon = pr.find(':');
          if (colon == std::string::npos)
            throw ScenarioError("commutator pairs must be a:b");
          std::string na = pr.substr(0, colon), nb = pr.substr(colon + 1);
          const Probe& a = resolve_probe(sc, na);
          const Probe& b = resolve_probe(sc, nb);
          cplx c = ev.commutator(a, b);
          double nrm = ev.commutator_normalized(a, b);
          CausalRelation rel = probe_causal(a, b);
          std::string space = rel.relation == Causal::SpacelikeSeparated ? "1"
                              : rel.relation == Causal::NotSpacelikeSeparated
                                  ? "0"
                                  : "-1";
          t.rows.push_back({std::to_string(idx++), na, nb, fmt_cplx_re(c),
                            fmt_cplx_im(c), format_sci(nrm),
                            format_sci(rel.margin), space});
        }
        write_csv(path, t);
        record(out.kind, file);
      } else if (out.kind == "wightman") {
        auto names = split_ws(need("functions"));
        std::vector<Probe> probes;
        for (const auto& n : names) probes.push_back(resolve_probe(sc, n));
        cplx v = ev.wightman(probes);
        CsvTable t;
        t.comments = base_comments(sc, "wightman");
        t.columns = {"n", "re", "im"};
        std::vector<std::string> row = {std::to_string(names.size()),
                                        fmt_cplx_re(v), fmt_cplx_im(v)};
        if (with_oracle) {
          // independent path: expand prod (a + a+) into 2^n monomials and
          // evaluate each by commutator rewriting
          if (names.size() > 8)
            throw ScenarioError("oracle path capped at n = 8");
          cplx total(0.0);
          for (std::uint32_t mask = 0; mask < (1u << names.size()); ++mask) {
            OperatorMonomial mono;
            for (std::size_t i = 0; i < names.size(); ++i) {
              OperatorFactor f;
              f.kind = (mask >> i) & 1 ? OperatorFactor::Create
                                       : OperatorFactor::Annihilate;
              f.fn = probes[i];
              mono.factors.push_back(f);
            }
            total += ev.vacuum_expectation(mono, /*force_rewrite=*/true);
          }
          t.columns.push_back("oracle_re");
          t.columns.push_back("oracle_im");
          row.push_back(fmt_cplx_re(total));
          row.push_back(fmt_cplx_im(total));
        }
        t.rows.push_back(row);
        write_csv(path, t);
        record(out.kind, file);
      } else if (out.kind == "density") {
        std::string kind = get("kind", "vacuum");
        DensitySpec spec;
        int n = 1;
        if (kind == "deformed") {
          spec.kind = DensitySpec::GDeformed;
          std::string gk = get("g", "identity");
          spec.G.kind = gk == "identity" ? GDescriptor::Identity
                        : gk == "xtanh"
                            ? GDescriptor::XMinusTanh
                            : throw ScenarioError("unknown g descriptor: " + gk);
          if (out.kv.count("variance")) {
            spec.variance = parse_one_double(out.kv.at("variance"), "variance");
          } else {
            const Probe& p = resolve_probe(sc, need("variance-from"));
            spec.variance = ev.xi(p, p).real();
          }
        } else {
          auto names = split_ws(need("functions"));
          n = int(names.size());
          std::vector<Probe> probes;
          for (const auto& nm : names) probes.push_back(resolve_probe(sc, nm));
          spec.F.resize(n, n);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              spec.F(i, j) = ev.xi(probes[i], probes[j]).real();
          if (kind == "one-particle") {
            spec.kind = DensitySpec::OneParticle;
            const Probe& g = resolve_probe(sc, need("creator"));
            double norm = ev.xi(g, g).real();
            if (!(norm > 0.0)) throw NumericalError("null state direction");
            spec.S.resize(n);
            for (int i = 0; i < n; ++i)
              spec.S(i) = ev.xi(probes[i], g) / std::sqrt(norm);
          } else if (kind == "vacuum") {
            spec.kind = DensitySpec::VacuumGaussian;
          } else {
            throw ScenarioError("unknown density kind: " + kind);
          }
        }
        double lo = parse_one_double(get("min", "-5"), "min");
        double hi = parse_one_double(get("max", "5"), "max");
        int pts = int(parse_one_double(get("points", "101"), "points"));
        if (pts < 2 || hi <= lo) throw ScenarioError("bad density slice range");
        CsvTable t;
        t.comments = base_comments(sc, "density");
        t.columns = {"x", "value"};
        for (int i = 0; i < pts; ++i) {
          double x = lo + (hi - lo) * i / (pts - 1);
          std::vector<double> xv(std::size_t(spec.kind == DensitySpec::GDeformed
                                                 ? 1
                                                 : n),
                                 0.0);
          xv[0] = x;
          t.rows.push_back({format_sci(x), format_sci(joint_density(spec, xv))});
        }
        write_csv(path, t);
        record(out.kind, file);
      } else if (out.kind == "sweep") {
        const Probe& p = resolve_probe(sc, need("function"));
        auto dir = parse_doubles(need("direction"), "direction");
        if (dir.size() != 4) throw ScenarioError("direction needs 4 numbers");
        int steps = int(parse_one_double(need("steps"), "steps"));
        double h = parse_one_double(need("step"), "step");
        CsvTable t;
        t.comments = base_comments(sc, "sweep");
        t.columns = {"k",  "a0", "a1", "a2", "a3", "phase_re", "phase_im",
                     "direct_re", "direct_im"};
        for (int k = 0; k < steps; ++k) {
          std::array<double, 4> a = {dir[0] * h * k, dir[1] * h * k,
                                     dir[2] * h * k, dir[3] * h * k};
          cplx phase = ev.translated_autocorrelation(p, a);
          cplx direct = ev.xi(p, translate_probe(p, a));
          t.rows.push_back({std::to_string(k), format_sci(a[0]), format_sci(a[1]),
                            format_sci(a[2]), format_sci(a[3]),
                            fmt_cplx_re(phase), fmt_cplx_im(phase),
                            fmt_cplx_re(direct), fmt_cplx_im(direct)});
        }
        write_csv(path, t);
        record(out.kind, file);
      } else if (out.kind == "characteristic") {
        auto names = split_ws(need("functions"));
        std::vector<Probe> probes;
        for (const auto& nm : names) probes.push_back(resolve_probe(sc, nm));
        double lo = parse_one_double(get("lambda_min", "-3"), "lambda_min");
        double hi = parse_one_double(get("lambda_max", "3"), "lambda_max");
        int pts = int(parse_one_double(get("points", "21"), "points"));
        if (pts < 2 || hi <= lo)
          throw ScenarioError("bad characteristic-function range");
        CsvTable t;
        t.comments = base_comments(sc, "characteristic");
        t.columns = {"lambda", "re", "im"};
        for (int i = 0; i < pts; ++i) {
          double l = lo + (hi - lo) * i / (pts - 1);
          std::vector<double> lam(names.size(), l);
          cplx v = ev.characteristic_function(sc.state, probes, lam);
          t.rows.push_back({format_sci(l), fmt_cplx_re(v), fmt_cplx_im(v)});
        }
        write_csv(path, t);
        record(out.kind, file);
      }
    }
  } catch (const NumericalError& e) {
    manifest["error"] = e.what();
    exit_code = 3;
  } catch (const std::runtime_error& e) {
    // singular geometry and kindred numerical failures surface here
    if (std::string(e.what()).find("singular") != std::string::npos ||
        std::string(e.what()).find("shell") != std::string::npos) {
      manifest["error"] = e.what();
      exit_code = 3;
    } else {
      throw;
    }
  }

  std::ofstream mf((fs::path(out_dir) / "manifest.json").string());
  mf << manifest.dump(2) << "\n";
  return exit_code;
}

}  // namespace nlqft
