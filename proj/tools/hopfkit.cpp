// hopfkit command-line front end.
//
//   hopfkit build|diagnose|trace|relax|report [options]
//
// Exit codes: 0 success, 1 gate failure, 2 usage/config error, 3 I/O error.

#include "hopfkit/beltrami.hpp"
#include "hopfkit/contact.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <unistd.h>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace hopfkit;

namespace {

enum Exit { ok = 0, gate_failure = 1, usage = 2, io_error = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kinds = {"hopfion", "dyon", "beltrami", "torus", "clebsch", "from-file"};

const std::map<std::string, double> default_tolerances = {
    {"null", 1e-10},       // null residual gate
    {"arnold", 1e-12},     // relative slack of E >= lambda1 |H|
    {"closure", 1e-6},     // field-line closure gap / length
    {"trace", 1e-10},      // integrator error per unit length
    {"relax", 1e-9},       // relaxation force-free residual
    {"ratio", 1e-6},       // relaxed E/|H| against lambda1, relative
    {"divergence", 1e-6},  // divergence gate, when requested
};

struct Mode {
  std::array<int, 3> k{0, 0, 1};
  int sign = 1;
  double amplitude = 1.0, phase = 0.0;
};

struct RunConfig {
  std::string command;
  std::string kind = "hopfion";
  std::optional<std::array<int, 3>> grid;
  std::optional<std::array<double, 3>> box, origin;
  double size = 1.0, amplitude = 1.0;
  std::vector<Mode> modes;
  int p = 2, q = 3;
  std::optional<double> rotation;
  std::string input;
  std::vector<Vec3> seeds;
  std::map<std::string, double> tol = default_tolerances;
  std::vector<std::string> gates;
  std::string out = ".";
  std::string format;
  int max_iters = 1000;
};

// ---------------------------------------------------------------------------
// parsing helpers

template <class T, std::size_t N>
std::array<T, N> parse_tuple(const std::string& text, const std::string& what) {
  std::array<T, N> out{};
  std::stringstream ss(text);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= N) throw UsageError(what + ": expected " + std::to_string(N) + " comma-separated values, got '" + text + "'");
    try {
      std::size_t used = 0;
      if constexpr (std::is_integral_v<T>)
        out[i] = static_cast<T>(std::stoll(item, &used));
      else
        out[i] = static_cast<T>(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(what + ": cannot parse '" + item + "'");
    }
    ++i;
  }
  if (i != N) throw UsageError(what + ": expected " + std::to_string(N) + " comma-separated values, got '" + text + "'");
  return out;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw UsageError("unknown key '" + key + "' in " + where + " (allowed: " + list + ")");
    }
}

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError("config key '" + key + "': " + e.what());
  }
}

void apply_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  reject_unknown(j,
                 {"command", "kind", "grid", "box", "origin", "size", "amplitude", "modes", "p", "q", "rotation",
                  "input", "seeds", "tolerances", "gates", "out", "format", "max_iters"},
                 "config");
  if (j.contains("command")) c.command = get_as<std::string>(j, "command");
  if (j.contains("kind")) c.kind = get_as<std::string>(j, "kind");
  if (j.contains("grid")) c.grid = get_as<std::array<int, 3>>(j, "grid");
  if (j.contains("box")) c.box = get_as<std::array<double, 3>>(j, "box");
  if (j.contains("origin")) c.origin = get_as<std::array<double, 3>>(j, "origin");
  if (j.contains("size")) c.size = get_as<double>(j, "size");
  if (j.contains("amplitude")) c.amplitude = get_as<double>(j, "amplitude");
  if (j.contains("p")) c.p = get_as<int>(j, "p");
  if (j.contains("q")) c.q = get_as<int>(j, "q");
  if (j.contains("rotation")) c.rotation = get_as<double>(j, "rotation");
  if (j.contains("input")) c.input = get_as<std::string>(j, "input");
  if (j.contains("out")) c.out = get_as<std::string>(j, "out");
  if (j.contains("format")) c.format = get_as<std::string>(j, "format");
  if (j.contains("max_iters")) c.max_iters = get_as<int>(j, "max_iters");
  if (j.contains("gates")) c.gates = get_as<std::vector<std::string>>(j, "gates");
  if (j.contains("seeds"))
    for (const auto& s : get_as<std::vector<std::array<double, 3>>>(j, "seeds")) c.seeds.push_back({s[0], s[1], s[2]});
  if (j.contains("modes")) {
    if (!j["modes"].is_array()) throw UsageError("config key 'modes' must be an array");
    for (const auto& m : j["modes"]) {
      reject_unknown(m, {"k", "sign", "amplitude", "phase"}, "modes entry");
      Mode md;
      if (m.contains("k")) md.k = get_as<std::array<int, 3>>(m, "k");
      if (m.contains("sign")) md.sign = get_as<int>(m, "sign");
      if (m.contains("amplitude")) md.amplitude = get_as<double>(m, "amplitude");
      if (m.contains("phase")) md.phase = get_as<double>(m, "phase");
      c.modes.push_back(md);
    }
  }
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    if (!t.is_object()) throw UsageError("config key 'tolerances' must be an object");
    for (const auto& [name, value] : t.items()) {
      if (!default_tolerances.count(name)) throw UsageError("unknown tolerance '" + name + "'");
      if (!value.is_number()) throw UsageError("tolerance '" + name + "' must be a number");
      c.tol[name] = value.get<double>();
    }
  }
}

void validate(const RunConfig& c) {
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) {
    std::string list;
    for (const auto& k : kinds) list += (list.empty() ? "" : ", ") + k;
    throw UsageError("unknown field kind '" + c.kind + "' (valid kinds: " + list + ")");
  }
  for (const auto& [name, v] : c.tol)
    if (!(v > 0.0)) throw UsageError("tolerance '" + name + "' must be positive");
  if (!(c.size > 0.0)) throw UsageError("size must be positive");
  if (!(c.amplitude > 0.0)) throw UsageError("amplitude must be positive");
  if (c.max_iters < 1) throw UsageError("max_iters must be >= 1");
  if (!c.format.empty() && c.format != "csv" && c.format != "json" && c.format != "grid")
    throw UsageError("format must be csv, json or grid");
  for (const auto& g : c.gates)
    if (g != "arnold" && g != "null" && g != "divergence" && g != "force_free")
      throw UsageError("unknown gate '" + g + "' (valid: arnold, null, divergence, force_free)");
  if (c.kind == "from-file" && c.input.empty()) throw UsageError("kind from-file needs an input path");
}

// ---------------------------------------------------------------------------
// output

void write_atomic(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

json number(double v) {
  // exact round trip via 17 significant digits
  return json::parse(format_double(v));
}

// ---------------------------------------------------------------------------
// field construction

struct Built {
  EMField field;
  std::vector<std::string> provenance;
  std::optional<ClebschData> clebsch;
};

GridSpec3 grid_for(const RunConfig& c) {
  GridSpec3 g;
  int n = 64;
  double L = 16.0;
  bool centred = true;
  if (c.kind == "beltrami") {
    n = 32;
    L = 1.0;
    centred = false;
  } else if (c.kind == "torus") {
    L = 4.0;
  }
  g.n = c.grid.value_or(std::array<int, 3>{n, n, n});
  g.length = c.box.value_or(std::array<double, 3>{L, L, L});
  for (int a = 0; a < 3; ++a) g.origin[a] = centred ? -0.5 * g.length[a] : 0.0;
  // the dyon maps are singular on unit circles in coordinate planes; cell-centred
  // nodes never land on them
  if (c.kind == "dyon")
    for (int a = 0; a < 3; ++a) g.origin[a] += 0.5 * g.length[a] / g.n[a];
  if (c.origin) g.origin = *c.origin;
  try {
    g.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return g;
}

std::string grid_text(const GridSpec3& g) {
  std::ostringstream os;
  os << std::setprecision(17) << g.n[0] << ',' << g.n[1] << ',' << g.n[2] << " box=" << g.length[0] << ','
     << g.length[1] << ',' << g.length[2];
  return os.str();
}

Built load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open input file '" + path + "'");
  LoadedField lf;
  try {
    lf = read_field_grid(is);
  } catch (const Error& e) {
    throw IoError(std::string("cannot read field file '") + path + "': " + e.what());
  }
  Built b;
  b.field = std::move(lf.field);
  b.provenance = lf.provenance;
  for (const auto& line : lf.provenance) {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      if (tok.rfind("scale=", 0) == 0) b.field.scale = std::stod(tok.substr(6));
      if (tok.rfind("kind=", 0) == 0) b.field.kind = tok.substr(5);
    }
  }
  return b;
}

Built build_field(const RunConfig& c) {
  if (c.kind == "from-file") return load_file(c.input);
  const GridSpec3 g = grid_for(c);
  Built b;
  std::ostringstream prov;
  prov << std::setprecision(17) << "hopfkit " << version << " kind=" << c.kind;
  if (c.kind == "hopfion") {
    b.field = build_hopfion(g, c.size, c.amplitude);
    b.clebsch = hopfion_clebsch(c.size, c.amplitude);
    prov << " size=" << c.size << " scale=" << c.amplitude;
  } else if (c.kind == "dyon") {
    std::optional<DyonPair> pair;
    try {
      pair.emplace(hopf_dyon_pair(g, c.size));
    } catch (const Error& e) {
      throw UsageError(std::string(e.what()) +
                       "; a grid node lies on a singular circle of the Hopf maps, shift the grid origin");
    }
    b.field = pair->as_field(g);
    prov << " size=" << c.size << " scale=1";
  } else if (c.kind == "clebsch") {
    b.field = build_single_pair_field(g, c.size, c.amplitude);
    const double size = c.size, a = c.amplitude;
    b.clebsch = single_pair_clebsch(nullptr, [size, a](const Vec3& x) { return a * s3_lift(x, size).u[0] / pi; },
                                    [size](const Vec3& x) { return s3_lift(x, size).u[1]; });
    prov << " size=" << c.size << " scale=" << c.amplitude;
  } else if (c.kind == "beltrami") {
    std::vector<Mode> modes = c.modes.empty() ? std::vector<Mode>{Mode{}} : c.modes;
    VectorField3 v(g);
    std::vector<BeltramiMode> bm;
    for (const auto& m : modes) {
      BeltramiMode mode{m.k, m.sign, m.amplitude, m.phase};
      v += build_beltrami_mode(mode, g);
      bm.push_back(mode);
      prov << " mode=" << m.k[0] << ',' << m.k[1] << ',' << m.k[2] << ':' << m.sign << ':' << m.amplitude << ':'
           << m.phase;
    }
    v.set_closure([bm, g](const Vec3& x) {
      Vec3 s;
      for (const auto& m : bm) s += m(x, g);
      return s;
    });
    b.field.B = v;
    b.field.E = VectorField3(g);
    b.field.kind = "beltrami";
    prov << " scale=1";
  } else if (c.kind == "torus") {
    if (c.rotation) {
      b.field.B = build_torus_field(*c.rotation, g);
      prov << " rotation=" << *c.rotation;
    } else {
      b.field.B = build_invariant_torus_field(c.p, c.q, g);
      prov << " p=" << c.p << " q=" << c.q;
    }
    b.field.E = VectorField3(g);
    b.field.kind = "torus";
    prov << " scale=1";
  }
  prov << " grid=" << grid_text(g);
  b.provenance.push_back(prov.str());
  return b;
}

std::string field_text(const Built& b, const std::string& format) {
  std::ostringstream os;
  if (format == "csv") {
    const auto& f = b.field;
    const auto& g = f.grid();
    os << std::setprecision(17) << "x,y,z,Ex,Ey,Ez,Bx,By,Bz\n";
    for (std::size_t q = 0; q < g.size(); ++q) {
      const Vec3 p = g.node(q), E = f.E.get(q), B = f.B.get(q);
      os << p.x << ',' << p.y << ',' << p.z << ',' << E.x << ',' << E.y << ',' << E.z << ',' << B.x << ',' << B.y
         << ',' << B.z << '\n';
    }
  } else {
    write_field_grid(os, b.field, b.provenance);
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// diagnostics

DiagnosticsReport diagnose_field(const EMField& f) {
  DiagnosticsReport r;
  r.scale = f.scale;
  r.energy_em = energy_em(f);
  r.energy_v = energy_v(f.B);
  r.null = null_residuals(f);
  r.div = maxwell_divergence_residuals(f);
  const VectorField3 Bp = solenoidal_project(remove_mean(f.B));
  const double bb = inner(Bp, Bp);
  if (bb > 0.0) {
    const VectorField3 A = curl_inverse(Bp);
    r.helicity_ab = helicity_AB(A, Bp);
    r.helicity_v = helicity_v(Bp);
    r.cs = chern_simons(A);
    const auto ff = force_free_residual(Bp);
    r.kappa_fit = ff.kappa_fit;
    r.force_free = ff.residual;
  }
  r.arnold = arnold_from(r.energy_v, r.helicity_v, arnold_lambda1(f.grid()));
  return r;
}

json report_json(const DiagnosticsReport& r) {
  json j;
  j["energy_em"] = number(r.energy_em);
  j["energy_v"] = number(r.energy_v);
  j["helicity_ab"] = number(r.helicity_ab);
  j["helicity_v"] = number(r.helicity_v);
  j["cs"] = number(r.cs);
  j["null_dot"] = number(r.null.dot);
  j["null_norm"] = number(r.null.norm);
  j["div_b"] = number(r.div.div_b);
  j["div_e"] = number(r.div.div_e);
  j["arnold_lhs"] = number(r.arnold.lhs);
  j["arnold_rhs"] = number(r.arnold.rhs);
  j["arnold_lambda1"] = number(r.arnold.lambda1);
  j["arnold_ok"] = r.arnold.satisfied;
  j["scale"] = number(r.scale);
  j["kappa_fit"] = number(r.kappa_fit);
  j["force_free"] = number(r.force_free);
  return j;
}

struct GateResult {
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<GateResult> evaluate_gates(const RunConfig& c, const EMField& f, const DiagnosticsReport& r) {
  std::vector<std::string> gates = c.gates;
  if (gates.empty()) {
    gates.push_back("arnold");
    bool has_e = false;
    for (int a = 0; a < 3 && !has_e; ++a)
      for (double x : f.E.component(a))
        if (x != 0.0) {
          has_e = true;
          break;
        }
    if (has_e) gates.push_back("null");
  }
  std::vector<GateResult> out;
  for (const auto& g : gates) {
    if (g == "arnold") {
      const bool pass = r.arnold.lhs >= r.arnold.rhs - c.tol.at("arnold") * std::abs(r.arnold.lhs);
      out.push_back({g, pass, "lhs=" + format_double(r.arnold.lhs) + " rhs=" + format_double(r.arnold.rhs)});
    } else if (g == "null") {
      const double t = c.tol.at("null");
      const bool pass = !r.null.degenerate && r.null.dot < t && r.null.norm < t;
      out.push_back({g, pass, "dot=" + format_double(r.null.dot) + " norm=" + format_double(r.null.norm)});
    } else if (g == "divergence") {
      const double t = c.tol.at("divergence");
      out.push_back({g, r.div.div_b < t && r.div.div_e < t,
                     "div_b=" + format_double(r.div.div_b) + " div_e=" + format_double(r.div.div_e)});
    } else if (g == "force_free") {
      out.push_back({g, r.force_free < c.tol.at("relax"), "residual=" + format_double(r.force_free)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// commands

int cmd_build(const RunConfig& c) {
  const Built b = build_field(c);
  const std::string fmt = c.format.empty() ? "grid" : c.format;
  if (fmt == "json") throw UsageError("build supports --format grid or csv");
  const fs::path path = fs::path(c.out) / (fmt == "csv" ? "field.csv" : "field.grid");
  write_atomic(path, field_text(b, fmt));
  std::cout << "wrote " << path.string() << " (" << b.field.grid().size() << " nodes)\n";
  return ok;
}

int cmd_diagnose(const RunConfig& c, bool gated) {
  const Built b = build_field(c);
  const DiagnosticsReport r = diagnose_field(b.field);
  const auto gates = gated ? evaluate_gates(c, b.field, r) : std::vector<GateResult>{};
  const std::string fmt = c.format.empty() ? (gated ? "grid" : "json") : c.format;
  std::string content;
  fs::path path;
  if (fmt == "json") {
    json j;
    j["report"] = report_json(r);
    if (gated) {
      json g = json::array();
      for (const auto& x : gates) g.push_back({{"gate", x.name}, {"pass", x.pass}, {"detail", x.detail}});
      j["gates"] = g;
    }
    if (!gated && b.clebsch) {
      const auto samples = halton_points(1024, b.field.grid().lower(), b.field.grid().upper());
      const auto nc = nonintegrability_check(*b.clebsch, samples);
      j["contact"] = {{"min_density", number(nc.min_density)},
                      {"sample_count", nc.sample_count},
                      {"verdict", nc.contact ? "contact" : "integrable"},
                      {"chart", {{"kind", "box"}, {"lower", {number(b.field.grid().lower().x), number(b.field.grid().lower().y), number(b.field.grid().lower().z)}}, {"upper", {number(b.field.grid().upper().x), number(b.field.grid().upper().y), number(b.field.grid().upper().z)}}, {"sampler", "halton-2-3-5"}}}};
    }
    content = j.dump(2) + "\n";
    path = fs::path(c.out) / "report.json";
  } else {
    content = r.to_text();
    for (const auto& x : gates) content += "gate_" + x.name + "=" + (x.pass ? "pass" : "fail") + "\n";
    path = fs::path(c.out) / "report.txt";
  }
  write_atomic(path, content);
  std::cout << content;
  for (const auto& x : gates)
    if (!x.pass) {
      std::cerr << "gate '" << x.name << "' failed: " << x.detail << "\n";
      return gate_failure;
    }
  return ok;
}

int cmd_trace(const RunConfig& c) {
  if (c.seeds.empty()) throw UsageError("trace needs at least one seed (--seed \"x,y,z\")");
  const Built b = build_field(c);
  const auto& f = b.field;
  TraceOptions opt;
  opt.tol = c.tol.at("trace");
  opt.closure_tol = c.tol.at("closure");
  opt.scale_box = {f.grid().lower(), f.grid().upper()};

  struct Entry {
    std::optional<FieldLine> line;
    std::string error;
    KnotType knot;
  };
  std::vector<Entry> entries(c.seeds.size());
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    try {
      FieldLine line = f.B.has_closure() ? trace_field_line(f.B.closure(), c.seeds[i], opt)
                                         : trace_field_line(f.B, c.seeds[i], opt);
      entries[i].knot = torus_knot_classify(line);
      std::ostringstream csv;
      write_field_line_csv(csv, line);
      write_atomic(fs::path(c.out) / ("line_" + std::to_string(i) + ".csv"), csv.str());
      entries[i].line = std::move(line);
    } catch (const Error& e) {
      entries[i].error = e.what();
    }
  }

  json rec;
  json lines = json::array();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    json l;
    l["id"] = i;
    l["seed"] = {number(c.seeds[i].x), number(c.seeds[i].y), number(c.seeds[i].z)};
    if (entries[i].line) {
      const auto& L = *entries[i].line;
      l["closed"] = L.closed;
      l["gap"] = number(L.gap);
      l["period"] = L.closed ? number(L.period) : json(nullptr);
      l["length"] = number(L.length());
      l["samples"] = L.points.size();
      l["knot"] = entries[i].knot.label();
      l["csv"] = "line_" + std::to_string(i) + ".csv";
    } else {
      l["error"] = entries[i].error;
    }
    lines.push_back(l);
  }
  rec["lines"] = lines;
  json matrix = json::array();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < entries.size(); ++j) {
      const bool both = entries[i].line && entries[j].line && entries[i].line->closed && entries[j].line->closed;
      if (i == j || !both) {
        row.push_back(i == j && entries[i].line && entries[i].line->closed ? json(0) : json(nullptr));
        continue;
      }
      try {
        row.push_back(linking_number(*entries[i].line, *entries[j].line).value);
      } catch (const Error&) {
        row.push_back(nullptr);
      }
    }
    matrix.push_back(row);
  }
  rec["linking_matrix"] = matrix;
  json knots = json::array();
  for (const auto& e : entries) knots.push_back(e.line ? e.knot.label() : "error");
  rec["knot_types"] = knots;
  if (f.kind == "hopfion" || f.kind == "clebsch") {
    json h;
    h["helicity_route"] = number(hopf_helicity_route(f));
    const std::size_t closed =
        std::count_if(entries.begin(), entries.end(), [](const Entry& e) { return e.line && e.line->closed; });
    if (closed >= 2) {
      std::vector<const FieldLine*> cl;
      for (const auto& e : entries)
        if (e.line && e.line->closed) cl.push_back(&*e.line);
      const auto lk = linking_number(*cl[0], *cl[1]);
      h["fiber_route"] = number(lk.raw);
      h["value"] = lk.value;
      h["routes_agree"] = std::lround(h["helicity_route"].get<double>()) == lk.value;
    }
    rec["hopf_invariant"] = h;
  } else {
    rec["hopf_invariant"] = nullptr;
  }
  const std::string content = rec.dump(2) + "\n";
  write_atomic(fs::path(c.out) / "knots.json", content);
  std::cout << content;
  return ok;
}

int cmd_relax(const RunConfig& c) {
  Built b = build_field(c);
  RelaxOptions ro;
  ro.tol = c.tol.at("relax");
  ro.max_iters = c.max_iters;
  RelaxResult res;
  try {
    res = relax_to_minimizer(b.field.B, ro);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::not_converged) {
      std::cerr << "relax: " << e.what() << "\n";
      return gate_failure;
    }
    throw;
  }
  const double lambda1 = arnold_lambda1(b.field.grid());
  const double dev = std::abs(res.lambda - lambda1) / lambda1;
  const bool pass = dev <= c.tol.at("ratio");

  Built out;
  out.field.B = res.field;
  out.field.E = VectorField3(res.field.grid());
  out.provenance = b.provenance;
  out.provenance.push_back("hopfkit " + std::string(version) + " relaxed iterations=" + std::to_string(res.iterations));
  write_atomic(fs::path(c.out) / "relaxed.grid", field_text(out, "grid"));
  std::ostringstream trace;
  write_relax_trace(trace, res.trace);
  write_atomic(fs::path(c.out) / "relax_trace.csv", trace.str());
  std::ostringstream sum;
  sum << std::setprecision(17) << "iterations=" << res.iterations << '\n'
      << "energy=" << res.energy << '\n'
      << "helicity=" << res.helicity << '\n'
      << "ratio=" << res.lambda << '\n'
      << "lambda1=" << lambda1 << '\n'
      << "ratio_deviation=" << dev << '\n'
      << "ratio_ok=" << (pass ? "true" : "false") << '\n';
  write_atomic(fs::path(c.out) / "relax_summary.txt", sum.str());
  std::cout << sum.str();
  return pass ? ok : gate_failure;
}

int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::io: return io_error;
    case ErrorKind::not_converged:
    case ErrorKind::route_disagreement: return gate_failure;
    default: return usage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hopfkit: topological field construction and diagnostics"};
  app.require_subcommand(1, 1);
  RunConfig cfg;
  std::string config_path, grid_s, box_s, kind_s, input_s, out_s, format_s;
  std::vector<std::string> seed_s, tol_s;
  std::optional<double> size_o;

  std::map<std::string, CLI::App*> subs;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"build", "construct a field and write it in the structured-grid format"},
      {"diagnose", "compute the diagnostics report and apply invariant gates"},
      {"trace", "trace field lines from seeds and write the knot record"},
      {"relax", "relax a field to the energy minimizer at fixed helicity"},
      {"report", "diagnostics plus contact verdict as JSON, no gates"}};
  for (const auto& [name, help] : commands) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--config", config_path, "JSON run configuration (strict schema)");
    s->add_option("--out", out_s, "output directory");
    s->add_option("--grid", grid_s, "grid counts NX,NY,NZ");
    s->add_option("--box", box_s, "box lengths LX,LY,LZ");
    s->add_option("--seed", seed_s, "field-line seed \"x,y,z\" (repeatable)")->take_all();
    s->add_option("--tol", tol_s, "tolerance override NAME=VALUE (repeatable)")->take_all();
    s->add_option("--format", format_s, "csv|json|grid");
    s->add_option("--kind", kind_s, "field kind: hopfion, dyon, beltrami, torus, clebsch, from-file");
    s->add_option("--input", input_s, "input field file (structured-grid format)");
    s->add_option("--size", size_o, "Hopfion core size");
    subs[name] = s;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  }

  try {
    for (const auto& [name, s] : subs)
      if (s->parsed()) cfg.command = name;
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw IoError("cannot open config file '" + config_path + "'");
      json j;
      try {
        j = json::parse(is);
      } catch (const json::parse_error& e) {
        throw UsageError("config is not valid JSON: " + std::string(e.what()));
      }
      const std::string command = cfg.command;
      apply_json(cfg, j);
      if (!cfg.command.empty() && cfg.command != command)
        throw UsageError("config command '" + cfg.command + "' does not match '" + command + "'");
      cfg.command = command;
    }
    if (!grid_s.empty()) cfg.grid = parse_tuple<int, 3>(grid_s, "--grid");
    if (!box_s.empty()) cfg.box = parse_tuple<double, 3>(box_s, "--box");
    if (!kind_s.empty()) cfg.kind = kind_s;
    if (!input_s.empty()) {
      cfg.input = input_s;
      if (kind_s.empty()) cfg.kind = "from-file";
    }
    if (!out_s.empty()) cfg.out = out_s;
    if (!format_s.empty()) cfg.format = format_s;
    if (size_o) cfg.size = *size_o;
    for (const auto& s : seed_s) {
      const auto v = parse_tuple<double, 3>(s, "--seed");
      cfg.seeds.push_back({v[0], v[1], v[2]});
    }
    for (const auto& t : tol_s) {
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw UsageError("--tol expects NAME=VALUE, got '" + t + "'");
      const std::string name = t.substr(0, eq);
      if (!default_tolerances.count(name)) throw UsageError("unknown tolerance '" + name + "'");
      try {
        cfg.tol[name] = std::stod(t.substr(eq + 1));
      } catch (const std::exception&) {
        throw UsageError("--tol " + name + ": cannot parse value");
      }
    }
    validate(cfg);

    if (cfg.command == "build") return cmd_build(cfg);
    if (cfg.command == "diagnose") return cmd_diagnose(cfg, true);
    if (cfg.command == "report") return cmd_diagnose(cfg, false);
    if (cfg.command == "trace") return cmd_trace(cfg);
    if (cfg.command == "relax") return cmd_relax(cfg);
    throw UsageError("unknown command");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return io_error;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return io_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  }
}
