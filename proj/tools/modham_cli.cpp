#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "modham/cli_io.hpp"

using namespace modham;

namespace {

struct Flags {
  std::string config;
  bool lenient = false;
  std::optional<double> clip;
  std::optional<std::string> output_dir;
  std::optional<std::string> format;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("config", f.config, "config JSON path, '-' for stdin")->required();
  cmd->add_flag("--lenient", f.lenient, "ignore unknown config keys");
  cmd->add_option("--clip", f.clip, "move modes with c - 1/2 <= sing_tol to 1/2 + eps")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--output-dir", f.output_dir, "overrides output.directory");
  cmd->add_option("--format", f.format, "overrides output.formats")
      ->check(CLI::IsMember({"csv", "json"}));
}

// error.json must land somewhere even when the config itself is unusable
void write_parse_error(const Flags& f, const Error& e, int code) {
  if (!f.output_dir) return;
  std::error_code ec;
  std::filesystem::create_directories(*f.output_dir, ec);
  std::ofstream out(std::filesystem::path(*f.output_dir) / "error.json", std::ios::trunc);
  if (!out) return;
  Json j = {{"kind", std::string(kind_name(e.kind()))},
            {"message", e.what()},
            {"values", e.values()},
            {"task", "parse_config"},
            {"exit_code", code}};
  out << dump_json(j) << "\n";
}

std::optional<RunConfig> load(const Flags& f, std::vector<std::string>& notes, int& code) {
  try {
    std::vector<std::string> ignored;
    RunConfig cfg = parse_config_file(f.config, f.lenient, &ignored);
    for (const auto& k : ignored) notes.push_back("ignored unknown key " + k);
    if (f.clip) cfg.tolerances.clip = *f.clip;
    if (f.output_dir) cfg.output.directory = *f.output_dir;
    if (f.format) cfg.output.formats = {*f.format};
    return cfg;
  } catch (const Error& e) {
    code = exit_code_for(e.kind());
    std::cerr << kind_name(e.kind()) << ": " << e.what() << "\n";
    write_parse_error(f, e, code);
    return std::nullopt;
  }
}

int execute(const Flags& f, RunMode mode) {
  std::vector<std::string> notes;
  int code = kExitOk;
  auto cfg = load(f, notes, code);
  if (!cfg) return code;
  RunOutcome out = run(*cfg, mode, notes);
  for (const auto& r : out.residuals)
    std::cout << r.task << " " << r.name << " = " << r.value << " (tol " << r.tolerance << ") "
              << (r.pass ? "ok" : "FAIL") << "\n";
  if (out.error_kind) std::cerr << *out.error_kind << ": " << out.error_message << "\n";
  std::cout << "precision: " << (out.digits == 0 ? std::string("double")
                                                 : std::to_string(out.digits) + " digits")
            << "\noutput: " << cfg->output.directory << "\nexit " << out.exit_code << "\n";
  return out.exit_code;
}

int check(const Flags& f) {
  std::vector<std::string> notes;
  int code = kExitOk;
  auto cfg = load(f, notes, code);
  if (!cfg) return code;
  for (const auto& n : notes) std::cerr << n << "\n";
  std::cout << dump_json(config_to_json(*cfg)) << "\n";
  Region r = resolve_region(*cfg);
  bool region_tasks = false;
  for (Task t : cfg->tasks) region_tasks = region_tasks || t != Task::EntropyScan;
  if (region_tasks && (r.is_full() || 2 * r.size() > r.n_sites())) {
    std::cerr << "NotStandardError: region is not standard\n";
    return kExitConstruction;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"modular Hamiltonian of a free scalar lattice field"};
  app.require_subcommand(1);
  Flags run_f, check_f, scan_f;
  auto* run_cmd = app.add_subcommand("run", "execute the configured tasks");
  auto* check_cmd = app.add_subcommand("check", "validate a config without computing");
  auto* scan_cmd = app.add_subcommand("scan", "entropy scan over scan.lengths only");
  add_flags(run_cmd, run_f);
  add_flags(check_cmd, check_f);
  add_flags(scan_cmd, scan_f);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  if (*run_cmd) return execute(run_f, RunMode::Tasks);
  if (*scan_cmd) return execute(scan_f, RunMode::ScanOnly);
  return check(check_f);
}
