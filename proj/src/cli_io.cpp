#include "modham/cli_io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include "modham/modular_flow.hpp"
#include "modham/precision.hpp"
#include "modham/region_kernels.hpp"

namespace modham {

namespace fs = std::filesystem;

std::string_view to_string(Task t) {
  switch (t) {
    case Task::Kernels: return "kernels";
    case Task::Flow: return "flow";
    case Task::Kms: return "kms";
    case Task::EntropyScan: return "entropy_scan";
    case Task::Crosscheck: return "crosscheck";
  }
  return "?";
}

// ---------------------------------------------------------------- parsing

namespace {

[[noreturn]] void schema(const std::string& path, const std::string& what) {
  fail(ErrorKind::Schema, (path.empty() ? std::string("/") : path) + ": " + what);
}

class Reader {
 public:
  Reader(bool lenient, std::vector<std::string>* ignored) : lenient_(lenient), ignored_(ignored) {}

  void keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) schema(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const char* a : allowed) known = known || it.key() == a;
      if (known) continue;
      if (!lenient_) schema(path + "/" + it.key(), "unknown key");
      if (ignored_) ignored_->push_back(path + "/" + it.key());
    }
  }

 private:
  bool lenient_;
  std::vector<std::string>* ignored_;
};

const Json* find(const Json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const Json& require(const Json& obj, const char* key, const std::string& path) {
  const Json* v = find(obj, key);
  if (!v) schema(path + "/" + key, "missing required key");
  return *v;
}

long long as_int(const Json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 1e15)
      return static_cast<long long>(d);
  }
  schema(path, "expected an integer");
}

double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) schema(path, "expected a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) schema(path, "expected a finite number");
  return d;
}

double as_positive(const Json& v, const std::string& path) {
  double d = as_number(v, path);
  if (!(d > 0)) schema(path, "must be positive");
  return d;
}

std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) schema(path, "expected a string");
  return v.get<std::string>();
}

const Json& as_array(const Json& v, const std::string& path) {
  if (!v.is_array()) schema(path, "expected an array");
  return v;
}

Task parse_task(const std::string& s, const std::string& path) {
  for (Task t : {Task::Kernels, Task::Flow, Task::Kms, Task::EntropyScan, Task::Crosscheck})
    if (s == to_string(t)) return t;
  schema(path, "unknown task '" + s + "'");
}

Region region_from(const RegionConfig& rc, int n_sites) {
  switch (rc.kind) {
    case RegionConfig::Kind::Half: return Region::half(n_sites);
    case RegionConfig::Kind::Interval: return Region::interval(rc.start, rc.length, n_sites);
    case RegionConfig::Kind::Sites: return Region::from_sites(rc.sites, n_sites);
  }
  return Region::half(n_sites);
}

}  // namespace

RunConfig parse_config(const Json& doc, bool lenient, std::vector<std::string>* ignored) {
  Reader rd(lenient, ignored);
  RunConfig cfg;
  rd.keys(doc, "", {"model", "region", "tasks", "tolerances", "output", "precision", "scan", "kms"});

  const Json& m = require(doc, "model", "");
  rd.keys(m, "/model", {"n_sites", "mass", "coupling", "boundary"});
  long long n = as_int(require(m, "n_sites", "/model"), "/model/n_sites");
  if (n < 1 || n > 100000) schema("/model/n_sites", "must be in [1, 100000]");
  cfg.model.n_sites = static_cast<int>(n);
  cfg.model.mass = as_number(require(m, "mass", "/model"), "/model/mass");
  if (cfg.model.mass < 0) schema("/model/mass", "must be >= 0");
  if (const Json* v = find(m, "coupling")) {
    cfg.model.coupling = as_number(*v, "/model/coupling");
    if (cfg.model.coupling < 0) schema("/model/coupling", "must be >= 0");
  }
  if (const Json* v = find(m, "boundary")) {
    try {
      cfg.model.boundary = parse_boundary(as_string(*v, "/model/boundary"));
    } catch (const Error&) {
      schema("/model/boundary", "expected 'dirichlet' or 'periodic'");
    }
  }

  const Json& r = require(doc, "region", "");
  rd.keys(r, "/region", {"sites", "interval", "half"});
  int forms = (find(r, "sites") ? 1 : 0) + (find(r, "interval") ? 1 : 0) + (find(r, "half") ? 1 : 0);
  if (forms != 1) schema("/region", "exactly one of sites, interval, half");
  if (const Json* v = find(r, "sites")) {
    cfg.region.kind = RegionConfig::Kind::Sites;
    size_t k = 0;
    for (const Json& s : as_array(*v, "/region/sites"))
      cfg.region.sites.push_back(
          static_cast<int>(as_int(s, "/region/sites/" + std::to_string(k++))));
  } else if (const Json* v = find(r, "interval")) {
    cfg.region.kind = RegionConfig::Kind::Interval;
    rd.keys(*v, "/region/interval", {"start", "length"});
    cfg.region.start =
        static_cast<int>(as_int(require(*v, "start", "/region/interval"), "/region/interval/start"));
    cfg.region.length = static_cast<int>(
        as_int(require(*v, "length", "/region/interval"), "/region/interval/length"));
  } else {
    rd.keys(*find(r, "half"), "/region/half", {});
    cfg.region.kind = RegionConfig::Kind::Half;
  }
  try {
    (void)region_from(cfg.region, cfg.model.n_sites);
  } catch (const Error& e) {
    std::string where = cfg.region.kind == RegionConfig::Kind::Sites      ? "/region/sites"
                        : cfg.region.kind == RegionConfig::Kind::Interval ? "/region/interval"
                                                                          : "/region/half";
    schema(where, e.what());
  }

  const Json& tasks = as_array(require(doc, "tasks", ""), "/tasks");
  if (tasks.empty()) schema("/tasks", "must not be empty");
  size_t k = 0;
  for (const Json& t : tasks) {
    std::string path = "/tasks/" + std::to_string(k++);
    cfg.tasks.push_back(parse_task(as_string(t, path), path));
  }

  if (const Json* t = find(doc, "tolerances")) {
    rd.keys(*t, "/tolerances", {"route_tol", "kms_tol", "quad_tol", "sing_tol", "clip"});
    Tolerances& tol = cfg.tolerances;
    if (const Json* v = find(*t, "route_tol")) tol.route_tol = as_positive(*v, "/tolerances/route_tol");
    if (const Json* v = find(*t, "kms_tol")) tol.kms_tol = as_positive(*v, "/tolerances/kms_tol");
    if (const Json* v = find(*t, "quad_tol")) tol.quad_tol = as_positive(*v, "/tolerances/quad_tol");
    if (const Json* v = find(*t, "sing_tol")) tol.sing_tol = as_positive(*v, "/tolerances/sing_tol");
    if (const Json* v = find(*t, "clip")) tol.clip = as_positive(*v, "/tolerances/clip");
  }

  if (const Json* o = find(doc, "output")) {
    rd.keys(*o, "/output", {"directory", "formats"});
    if (const Json* v = find(*o, "directory")) {
      cfg.output.directory = as_string(*v, "/output/directory");
      if (cfg.output.directory.empty()) schema("/output/directory", "must not be empty");
    }
    if (const Json* v = find(*o, "formats")) {
      cfg.output.formats.clear();
      size_t i = 0;
      for (const Json& f : as_array(*v, "/output/formats")) {
        std::string path = "/output/formats/" + std::to_string(i++);
        std::string s = as_string(f, path);
        if (s != "csv" && s != "json") schema(path, "expected 'csv' or 'json'");
        cfg.output.formats.push_back(s);
      }
      if (cfg.output.formats.empty()) schema("/output/formats", "must not be empty");
    }
  }

  if (const Json* p = find(doc, "precision")) {
    rd.keys(*p, "/precision", {"mode", "digits"});
    std::string mode = p->contains("mode") ? as_string((*p)["mode"], "/precision/mode") : "auto";
    if (mode == "auto") {
      cfg.precision.mode = PrecisionConfig::Mode::Auto;
    } else if (mode == "double") {
      cfg.precision.mode = PrecisionConfig::Mode::Double;
    } else if (mode == "fixed") {
      cfg.precision.mode = PrecisionConfig::Mode::Fixed;
    } else {
      schema("/precision/mode", "expected 'auto', 'double' or 'fixed'");
    }
    if (const Json* v = find(*p, "digits")) {
      if (cfg.precision.mode != PrecisionConfig::Mode::Fixed)
        schema("/precision/digits", "only valid with mode 'fixed'");
      long long d = as_int(*v, "/precision/digits");
      if (d < 20 || d > 20000) schema("/precision/digits", "must be in [20, 20000]");
      cfg.precision.digits = static_cast<unsigned>(d);
    } else if (cfg.precision.mode == PrecisionConfig::Mode::Fixed) {
      schema("/precision/digits", "required with mode 'fixed'");
    }
  }

  if (const Json* s = find(doc, "scan")) {
    rd.keys(*s, "/scan", {"lengths", "placement"});
    if (const Json* v = find(*s, "lengths")) {
      size_t i = 0;
      for (const Json& l : as_array(*v, "/scan/lengths")) {
        std::string path = "/scan/lengths/" + std::to_string(i++);
        long long len = as_int(l, path);
        if (len < 1) schema(path, "must be >= 1");
        cfg.scan.lengths.push_back(static_cast<int>(len));
      }
    }
    if (const Json* v = find(*s, "placement")) {
      cfg.scan.placement = as_string(*v, "/scan/placement");
      if (cfg.scan.placement != "centered" && cfg.scan.placement != "left")
        schema("/scan/placement", "expected 'centered' or 'left'");
    }
  }

  if (const Json* q = find(doc, "kms")) {
    rd.keys(*q, "/kms", {"t_grid", "seed"});
    if (const Json* v = find(*q, "t_grid")) {
      cfg.kms.t_grid.clear();
      size_t i = 0;
      for (const Json& t : as_array(*v, "/kms/t_grid"))
        cfg.kms.t_grid.push_back(as_number(t, "/kms/t_grid/" + std::to_string(i++)));
    }
    if (const Json* v = find(*q, "seed")) {
      long long sd = as_int(*v, "/kms/seed");
      if (sd < 0 || sd > std::numeric_limits<unsigned>::max()) schema("/kms/seed", "out of range");
      cfg.kms.seed = static_cast<unsigned>(sd);
    }
  }
  return cfg;
}

RunConfig parse_config_text(const std::string& text, bool lenient,
                            std::vector<std::string>* ignored) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::Schema, std::string("/: invalid JSON: ") + e.what());
  }
  return parse_config(doc, lenient, ignored);
}

RunConfig parse_config_file(const std::string& path, bool lenient,
                            std::vector<std::string>* ignored) {
  std::string text;
  if (path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  } else {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) fail(ErrorKind::FileNotFound, "config not found: " + path);
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return parse_config_text(text, lenient, ignored);
}

Json config_to_json(const RunConfig& cfg) {
  Json j;
  j["model"] = {{"n_sites", cfg.model.n_sites},
                {"mass", cfg.model.mass},
                {"coupling", cfg.model.coupling},
                {"boundary", std::string(to_string(cfg.model.boundary))}};
  switch (cfg.region.kind) {
    case RegionConfig::Kind::Half: j["region"] = {{"half", Json::object()}}; break;
    case RegionConfig::Kind::Interval:
      j["region"] = {{"interval", {{"start", cfg.region.start}, {"length", cfg.region.length}}}};
      break;
    case RegionConfig::Kind::Sites: j["region"] = {{"sites", cfg.region.sites}}; break;
  }
  j["tasks"] = Json::array();
  for (Task t : cfg.tasks) j["tasks"].push_back(std::string(to_string(t)));
  Json tol = {{"route_tol", cfg.tolerances.route_tol},
              {"kms_tol", cfg.tolerances.kms_tol},
              {"quad_tol", cfg.tolerances.quad_tol}};
  if (cfg.tolerances.sing_tol) tol["sing_tol"] = *cfg.tolerances.sing_tol;
  if (cfg.tolerances.clip) tol["clip"] = *cfg.tolerances.clip;
  j["tolerances"] = tol;
  j["output"] = {{"directory", cfg.output.directory}, {"formats", cfg.output.formats}};
  switch (cfg.precision.mode) {
    case PrecisionConfig::Mode::Auto: j["precision"] = {{"mode", "auto"}}; break;
    case PrecisionConfig::Mode::Double: j["precision"] = {{"mode", "double"}}; break;
    case PrecisionConfig::Mode::Fixed:
      j["precision"] = {{"mode", "fixed"}, {"digits", cfg.precision.digits}};
      break;
  }
  j["scan"] = {{"lengths", cfg.scan.lengths}, {"placement", cfg.scan.placement}};
  j["kms"] = {{"t_grid", cfg.kms.t_grid}, {"seed", cfg.kms.seed}};
  return j;
}

Region resolve_region(const RunConfig& cfg) { return region_from(cfg.region, cfg.model.n_sites); }

// ---------------------------------------------------------------- output

namespace {

void dump_to(const Json& v, std::string& out, int indent) {
  auto pad = [&](int k) { out.append(static_cast<size_t>(2 * k), ' '); };
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        pad(indent + 1);
        out += Json(it.key()).dump();
        out += ": ";
        dump_to(it.value(), out, indent + 1);
      }
      out += "\n";
      pad(indent);
      out += "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      bool flat = true;
      for (const Json& e : v) flat = flat && !e.is_structured();
      if (flat) {
        out += "[";
        bool first = true;
        for (const Json& e : v) {
          if (!first) out += ", ";
          first = false;
          dump_to(e, out, indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const Json& e : v) {
        if (!first) out += ",\n";
        first = false;
        pad(indent + 1);
        dump_to(e, out, indent + 1);
      }
      out += "\n";
      pad(indent);
      out += "]";
      return;
    }
    case Json::value_t::number_float: {
      double d = v.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", d);
      out += buf;
      return;
    }
    default: out += v.dump();
  }
}

std::string fmt17(double d) {
  if (!std::isfinite(d)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

void write_file(const fs::path& path, const std::string& text, RunOutcome& out) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::Io, "cannot write " + path.string());
  f << text;
  f.close();
  if (!f) fail(ErrorKind::Io, "write failed for " + path.string());
  out.files.push_back(path.filename().string());
}

void write_json(const fs::path& path, const Json& j, RunOutcome& out) {
  write_file(path, dump_json(j) + "\n", out);
}

Json sites_json(const Region& r) { return Json(r.sites()); }

template <class T>
Json matrix_json(const Mat<T>& m, const Region& region, bool phase_space) {
  Json sites = Json::array(), fields = Json::array();
  for (int s : region.sites()) {
    sites.push_back(s);
    fields.push_back(phase_space ? "phi" : "site");
  }
  if (phase_space)
    for (int s : region.sites()) {
      sites.push_back(s);
      fields.push_back("pi");
    }
  Json data = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(to_double(m(i, j)));
  Json j = {{"rows", m.rows()}, {"cols", m.cols()}, {"layout", "row-major"},
            {"index_sites", sites}, {"data", data}};
  if (phase_space) j["index_fields"] = fields;
  return j;
}

template <class T>
Json vector_json(const Vec<T>& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_double(v(i)));
  return a;
}

Json error_json(const Error& e) {
  return {{"kind", std::string(kind_name(e.kind()))},
          {"message", e.what()},
          {"values", e.values()}};
}

bool wants(const RunConfig& cfg, const char* fmt) {
  for (const auto& f : cfg.output.formats)
    if (f == fmt) return true;
  return false;
}

bool degenerate(const Region& r) {
  return r.empty() || r.is_full() || 2 * r.size() > r.n_sites();
}

Region scan_region(const RunConfig& cfg, int len) {
  int n = cfg.model.n_sites;
  int start = cfg.scan.placement == "left" ? 0 : (n - len) / 2;
  return Region::interval(start, len, n);
}

struct Context {
  const RunConfig& cfg;
  fs::path dir;
  RunOutcome& out;
  Json timing = Json::object();
  std::string current_task;

  void residual(const std::string& name, double value, double tol) {
    bool pass = std::isfinite(value) && value <= tol;
    out.residuals.push_back({current_task, name, value, tol, pass});
  }
};

template <class T>
struct Pipeline {
  Context& ctx;
  const LatticeModel& model;
  Region region;
  KernelOptions kopt;
  std::optional<GaussianState<T>> state_;
  std::optional<RestrictedCorrelators<T>> rc_;
  std::optional<RegionKernels<T>> kernels_;

  const GaussianState<T>& state() {
    if (!state_) state_ = vacuum_state<T>(model);
    return *state_;
  }
  const RestrictedCorrelators<T>& rc() {
    if (!rc_) rc_ = restrict_correlators(state(), region);
    return *rc_;
  }
  const RegionKernels<T>& kernels() {
    if (!kernels_) kernels_ = mn_kernels(rc(), kopt);
    return *kernels_;
  }

  FlowOptions flow_options() const {
    FlowOptions fo;
    fo.generator_tol = std::numeric_limits<double>::infinity();  // judged against route_tol
    fo.throw_on_branch_cut = false;
    return fo;
  }

  void kernels_task() {
    const auto& k = kernels();
    Vec<T> gap = k.c_spectrum.array() - T(0.5);
    T min_c2 = k.c_spectrum(0) * k.c_spectrum(0);
    Json j;
    j["region"] = {{"sites", sites_json(region)}, {"n_sites", region.n_sites()}};
    j["X_R"] = matrix_json(rc().X_R, region, false);
    j["P_R"] = matrix_json(rc().P_R, region, false);
    j["C"] = matrix_json(k.C, region, false);
    j["c_spectrum"] = vector_json(k.c_spectrum);
    j["c_minus_half"] = vector_json<T>(gap);
    j["M"] = matrix_json(k.M, region, false);
    j["N"] = matrix_json(k.N, region, false);
    j["L_block"] = matrix_json(k.L_block, region, true);
    j["entropy"] = to_double(entanglement_entropy(k));
    j["clipped_modes"] = k.clipped_modes;
    write_json(ctx.dir / "kernels.json", j, ctx.out);
    // spec(X_R P_R) >= 1/4 - 1e-10
    ctx.residual("positivity_deficit", std::max(0.0, to_double(T(T(0.25) - min_c2))), 1e-10);
  }

  void flow_task() {
    auto flow = build_flow(kernels(), rc(), flow_options());
    Json j;
    j["region"] = {{"sites", sites_json(region)}, {"n_sites", region.n_sites()}};
    j["L"] = matrix_json(flow.L, region, true);
    if (flow.L_check.size() > 0) j["L_check"] = matrix_json(flow.L_check, region, true);
    j["generator_residual"] = flow.generator_residual;
    j["exp_method"] = std::string(to_string(flow.method));
    j["warnings"] = flow.warnings;
    Json samples = Json::array();
    for (double t : ctx.cfg.kms.t_grid) {
      auto kt = flow_at(flow, {t, 0.0});
      samples.push_back({{"t", t}, {"K", matrix_json(kt.re, region, true)}});
    }
    j["K"] = samples;
    write_json(ctx.dir / "flow.json", j, ctx.out);
    ctx.residual("generator_residual", flow.generator_residual, ctx.cfg.tolerances.route_tol);
  }

  void kms_task() {
    SuiteOptions so;
    so.kernels = kopt;
    so.flow = flow_options();
    so.seed = ctx.cfg.kms.seed;
    KmsReport rep = run_kms_suite(state(), region, ctx.cfg.kms.t_grid, so);
    Json fails = Json::array();
    for (const auto& f : rep.failures)
      fails.push_back({{"t", f.t}, {"kind", f.kind}, {"message", f.message}});
    Json j = {{"t_values", rep.t_values},
              {"kms_residuals", rep.kms_residuals},
              {"group_residuals", rep.group_residuals},
              {"symplectic_residuals", rep.symplectic_residuals},
              {"max_residual", rep.max_residual},
              {"generator_residual", rep.generator_residual},
              {"exp_method", rep.exp_method},
              {"warnings", rep.warnings},
              {"failures", fails},
              {"seed", ctx.cfg.kms.seed}};
    write_json(ctx.dir / "kms.json", j, ctx.out);
    double tol = ctx.cfg.tolerances.kms_tol;
    auto vmax = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m = std::isfinite(x) ? std::max(m, x) : x;
      return m;
    };
    ctx.residual("kms_max", vmax(rep.kms_residuals), tol);
    ctx.residual("group_max", vmax(rep.group_residuals), tol);
    ctx.residual("symplectic_max", vmax(rep.symplectic_residuals), tol);
    ctx.residual("generator_residual", rep.generator_residual, ctx.cfg.tolerances.route_tol);
    ctx.residual("evaluation_failures", static_cast<double>(rep.failures.size()), 0.0);
  }

  void crosscheck_task() {
    const double tol = ctx.cfg.tolerances.route_tol;
    StandardnessReport std_rep = standardness_check(state(), region);
    if (!std_rep.is_standard) fail(ErrorKind::NotStandard, "region is not standard: " + std_rep.reason);
    Mat<T> a = region_block<T>(state().I_mat, lndelta_full(state(), region), region);
    const Mat<T>& b = kernels().L_block;
    QuadratureOptions qo;
    qo.abs_tol = ctx.cfg.tolerances.quad_tol;
    auto c = resolvent_quadrature_generator(rc(), qo, kopt);
    auto g = lndelta_region_via_G(rc(), kopt);
    Mat<T> split = region_block<T>(lndelta_arccot_split(state(), region), region);
    auto rd = [](const Mat<T>& x, const Mat<T>& y) { return to_double(relative_difference<T>(x, y)); };
    Json pair = {{"a_b", rd(a, b)}, {"a_c", rd(a, c.value)}, {"b_c", rd(b, c.value)},
                 {"g_b", rd(g.L, b)}, {"split_a", rd(split, a)}};
    Json j;
    j["region"] = {{"sites", sites_json(region)}, {"n_sites", region.n_sites()}};
    j["routes"] = {{"a", "2 arcoth(1 - P + IPI) on L + IL, region block of I lnDelta"},
                   {"b", "M-N blocks from C = sqrt(X_R P_R)"},
                   {"c", "resolvent quadrature of the region blocks"},
                   {"g", "-2 arccot(2 eps G_R + i)"},
                   {"split", "P / (1-P) arccot split"}};
    j["relative_differences"] = pair;
    j["quadrature"] = {{"evaluations", c.stats.evaluations},
                       {"error_estimate", c.stats.error_estimate},
                       {"step", c.stats.step}};
    j["g_max_imag_residual"] = g.max_imag_residual;
    j["standardness"] = {{"min_abs_eigenvalue", std_rep.min_abs_eigenvalue},
                         {"is_cyclic", std_rep.is_cyclic},
                         {"is_separating", std_rep.is_separating}};
    write_json(ctx.dir / "crosscheck.json", j, ctx.out);
    for (auto it = pair.begin(); it != pair.end(); ++it)
      ctx.residual("route_" + it.key(), it.value().get<double>(), tol);
    ctx.residual("standardness_deficit", std::max(0.0, 1.0 - std_rep.min_abs_eigenvalue), 1e-9);
  }
};

template <class T>
void entropy_scan(Context& ctx, const LatticeModel& model) {
  const RunConfig& cfg = ctx.cfg;
  auto state = vacuum_state<T>(model);
  Json rows = Json::array();
  std::string csv = "length,start,entropy,c_min,c_max,error_kind\n";
  for (int len : cfg.scan.lengths) {
    Json row = {{"length", len}};
    std::string err_kind;
    try {
      Region r = scan_region(cfg, len);
      row["start"] = r.sites().empty() ? 0 : r.sites().front();
      if (r.empty() || r.is_full())
        fail(ErrorKind::NotStandard, "interval covers the whole lattice");
      auto sp = symplectic_spectrum(restrict_correlators(state, r));
      row["entropy"] = to_double(entanglement_entropy<T>(sp.c));
      row["c_min"] = to_double(sp.c(0));
      row["c_max"] = to_double(sp.c(sp.c.size() - 1));
      row["error"] = nullptr;
    } catch (const Error& e) {
      err_kind = std::string(kind_name(e.kind()));
      row["error"] = error_json(e);
      for (const char* key : {"entropy", "c_min", "c_max"}) row[key] = nullptr;
      if (!row.contains("start")) row["start"] = nullptr;
    }
    auto num = [&](const char* key) {
      return row[key].is_number() ? fmt17(row[key].get<double>()) : std::string();
    };
    std::string start = row["start"].is_number() ? std::to_string(row["start"].get<int>()) : "";
    csv += std::to_string(len) + "," + start + "," + num("entropy") + "," + num("c_min") + "," +
           num("c_max") + "," + err_kind + "\n";
    rows.push_back(row);
  }
  if (wants(cfg, "json"))
    write_json(ctx.dir / "entropy_scan.json",
               {{"placement", cfg.scan.placement}, {"n_sites", cfg.model.n_sites}, {"rows", rows}},
               ctx.out);
  if (wants(cfg, "csv")) write_file(ctx.dir / "entropy_scan.csv", csv, ctx.out);
}

template <class T>
void run_tasks(Context& ctx, const LatticeModel& model, const Region& region) {
  Pipeline<T> p{ctx, model, region, {}, {}, {}, {}};
  p.kopt.sing_tol = ctx.cfg.tolerances.sing_tol;
  p.kopt.clip = ctx.cfg.tolerances.clip;
  for (Task t : ctx.cfg.tasks) {
    auto t0 = std::chrono::steady_clock::now();
    ctx.current_task = std::string(to_string(t));
    switch (t) {
      case Task::Kernels: p.kernels_task(); break;
      case Task::Flow: p.flow_task(); break;
      case Task::Kms: p.kms_task(); break;
      case Task::Crosscheck: p.crosscheck_task(); break;
      case Task::EntropyScan: entropy_scan<T>(ctx, model); break;
    }
    ctx.timing[ctx.current_task] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
}

}  // namespace

std::string dump_json(const Json& value) {
  std::string out;
  dump_to(value, out, 0);
  return out;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Schema: return kExitUsage;
    case ErrorKind::FileNotFound:
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::Numerical:
    case ErrorKind::QuadratureNotConverged:
    case ErrorKind::BranchCutProximity:
    case ErrorKind::Overflow:
    case ErrorKind::TruncationNotConverged: return kExitValidation;
    default: return kExitConstruction;
  }
}

RunOutcome run(const RunConfig& cfg, RunMode mode, const std::vector<std::string>& notes) {
  const auto t_start = std::chrono::steady_clock::now();
  RunOutcome out;
  Context ctx{cfg, fs::path(cfg.output.directory), out, Json::object(), "setup"};
  std::error_code ec;
  fs::create_directories(ctx.dir, ec);
  if (ec || !fs::is_directory(ctx.dir)) {
    out.exit_code = kExitIo;
    out.error_kind = std::string(kind_name(ErrorKind::Io));
    out.error_message = "cannot create output directory " + cfg.output.directory;
    return out;
  }

  for (const char* stale : {"kernels.json", "flow.json", "kms.json", "crosscheck.json",
                            "entropy_scan.json", "entropy_scan.csv", "residuals.json",
                            "error.json", "metadata.json"})
    fs::remove(ctx.dir / stale, ec);

  std::optional<Json> err;
  try {
    LatticeModel model =
        build_harmonic_chain(cfg.model.n_sites, cfg.model.mass, cfg.model.coupling, cfg.model.boundary);
    bool region_tasks = false;
    if (mode == RunMode::Tasks)
      for (Task t : cfg.tasks) region_tasks = region_tasks || t != Task::EntropyScan;
    Region region = resolve_region(cfg);
    if (region_tasks && degenerate(region))
      fail(ErrorKind::NotStandard,
           region.is_full() ? "region is the whole lattice (Delta = 1)"
                            : "region is empty or larger than its complement (not separating)");

    switch (cfg.precision.mode) {
      case PrecisionConfig::Mode::Double: out.digits = 0; break;
      case PrecisionConfig::Mode::Fixed: out.digits = cfg.precision.digits; break;
      case PrecisionConfig::Mode::Auto:
        // entropy alone is well conditioned in double
        out.digits = region_tasks ? plan_precision(model, region).digits : 0;
        break;
    }

    if (mode == RunMode::ScanOnly) {
      ctx.current_task = "entropy_scan";
      auto t0 = std::chrono::steady_clock::now();
      if (out.digits == 0) {
        entropy_scan<double>(ctx, model);
      } else {
        PrecisionScope ps(out.digits);
        entropy_scan<Real>(ctx, model);
      }
      ctx.timing["entropy_scan"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } else if (out.digits == 0) {
      run_tasks<double>(ctx, model, region);
    } else {
      PrecisionScope ps(out.digits);
      run_tasks<Real>(ctx, model, region);
    }
  } catch (const Error& e) {
    out.exit_code = exit_code_for(e.kind());
    out.error_kind = std::string(kind_name(e.kind()));
    out.error_message = e.what();
    err = error_json(e);
  } catch (const std::exception& e) {
    out.exit_code = kExitConstruction;
    out.error_kind = "InternalError";
    out.error_message = e.what();
    err = Json{{"kind", "InternalError"}, {"message", e.what()}, {"values", Json::array()}};
  }

  bool all_pass = true;
  Json res = Json::array();
  for (const auto& r : out.residuals) {
    all_pass = all_pass && r.pass;
    res.push_back({{"task", r.task}, {"name", r.name}, {"value", r.value},
                   {"tolerance", r.tolerance}, {"pass", r.pass}});
  }
  if (out.exit_code == kExitOk && !all_pass) out.exit_code = kExitValidation;

  try {
    if (err) {
      (*err)["task"] = ctx.current_task;
      (*err)["exit_code"] = out.exit_code;
      write_json(ctx.dir / "error.json", *err, out);
    }
    write_json(ctx.dir / "residuals.json", {{"residuals", res}, {"all_pass", all_pass}}, out);
    ctx.timing["total"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    Json files = out.files;
    files.push_back("metadata.json");
    Json meta = {{"config", config_to_json(cfg)},
                 {"version", "0.1.0"},
                 {"scalar", out.digits == 0 ? "double" : "mpfr"},
                 {"digits", out.digits == 0 ? std::numeric_limits<double>::digits10 : out.digits},
                 {"timing_seconds", ctx.timing},
                 {"notes", notes},
                 {"exit_code", out.exit_code},
                 {"files", files}};
    write_json(ctx.dir / "metadata.json", meta, out);
  } catch (const Error& e) {
    out.exit_code = kExitIo;
    out.error_kind = std::string(kind_name(e.kind()));
    out.error_message = e.what();
  }
  return out;
}

}  // namespace modham
