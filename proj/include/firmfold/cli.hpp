#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "firmfold/firmfold.hpp"

namespace firmfold::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kFailed = 1, kUsage = 2 };

inline constexpr std::size_t kDefaultMaxSteps = 10'000;
inline constexpr std::size_t kDefaultMaxStates = 10'000;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw IoError("cannot write " + path);
  }
}

inline std::optional<DialectTag> parse_dialect(const std::string& name) {
  if (name == "native") return DialectTag::Native;
  if (name == "firm") return DialectTag::FirmAttributed;
  return std::nullopt;
}

inline ProgramGraph load(const std::string& path, const std::string& dialect) {
  return load_gxl(read_file(path), parse_dialect(dialect));
}

/// FIRMFOLD_MAX_STEPS when set, else the built-in default.
inline std::size_t default_max_steps() {
  const char* env = std::getenv("FIRMFOLD_MAX_STEPS");
  if (env == nullptr || *env == '\0') return kDefaultMaxSteps;
  std::size_t value = 0;
  std::string_view text(env);
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || value == 0) {
    throw CLI::ValidationError("FIRMFOLD_MAX_STEPS", "must be a positive decimal integer");
  }
  return value;
}

inline int cmd_verify(const std::string& input, const std::string& dialect, std::ostream& out) {
  auto violations = verify(load(input, dialect));
  for (const Violation& v : violations) out << format_violation(v) << "\n";
  return violations.empty() ? kOk : kFailed;
}

struct FoldOptions {
  std::string input;
  std::string output;
  std::string trace_path;
  std::string dot_path;
  std::size_t max_steps = kDefaultMaxSteps;
  std::string dialect;
};

inline int cmd_fold(const FoldOptions& opts, std::ostream& out, std::ostream& err) {
  ProgramGraph start = load(opts.input, opts.dialect);
  FoldResult result;
  try {
    result = fold(start, rules::catalog(), opts.max_steps);
  } catch (const Error& e) {
    if (e.code() != Errc::StepLimitExceeded) throw;
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
  write_file(opts.output, save_native(result.graph));
  if (!opts.trace_path.empty()) write_file(opts.trace_path, format_trace(result.trace));
  if (!opts.dot_path.empty()) write_file(opts.dot_path, export_dot(result.graph));
  out << "fixpoint after " << result.steps << " steps\n";
  return kOk;
}

inline std::string format_report(const Lts& lts) {
  std::ostringstream report;
  report << "states: " << lts.states.size() << "\n"
         << "transitions: " << lts.transitions.size() << "\n"
         << "final_states: " << lts.finals.size() << "\n"
         << "final_states_isomorphic: " << (lts.finals_isomorphic() ? "true" : "false") << "\n";
  return report.str();
}

inline int cmd_explore(const std::string& input, const std::string& dialect,
                       std::size_t max_states, const std::string& report_path, std::ostream& out,
                       std::ostream& err) {
  ProgramGraph start = load(input, dialect);
  Lts lts;
  try {
    lts = explore(start, rules::catalog(), max_states);
  } catch (const Error& e) {
    if (e.code() != Errc::StateLimitExceeded) throw;
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
  std::string report = format_report(lts);
  if (report_path.empty()) {
    out << report;
  } else {
    write_file(report_path, report);
  }
  return kOk;
}

inline int cmd_example(std::int32_t a, std::int32_t b, const std::string& rel,
                       const std::string& output, std::ostream& out) {
  std::string bytes = save_native(build_min_plus_one(a, b, *parse_relation(rel)));
  if (output.empty() || output == "-") {
    out << bytes;
  } else {
    write_file(output, bytes);
  }
  return kOk;
}

/// Entry point shared by the binary and the tests. `args` excludes the
/// program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constant folding of FIRM-style program graphs by graph rewriting", "firmfold"};
  app.require_subcommand(1);
  const std::vector<std::string> dialects{"native", "firm"};
  const std::vector<std::string> relations{"lt", "le", "gt", "ge", "eq", "ne"};

  std::string dialect;
  auto add_dialect = [&](CLI::App* sub) {
    sub->add_option("--dialect", dialect, "Input dialect (default: auto-detect)")
        ->check(CLI::IsMember(dialects));
  };

  std::string verify_input;
  auto* verify_cmd = app.add_subcommand("verify", "Run the six sanity checks on a graph");
  verify_cmd->add_option("input", verify_input, "GXL file")->required();
  add_dialect(verify_cmd);

  FoldOptions fold_opts;
  std::optional<std::size_t> max_steps;
  auto* fold_cmd = app.add_subcommand("fold", "Rewrite a graph to its constant-folded fixpoint");
  fold_cmd->add_option("input", fold_opts.input, "GXL file")->required();
  fold_cmd->add_option("output", fold_opts.output, "Native GXL output")->required();
  fold_cmd->add_option("--trace", fold_opts.trace_path, "Write the rule application trace");
  fold_cmd->add_option("--dot", fold_opts.dot_path, "Write the result as Graphviz DOT");
  fold_cmd->add_option("--max-steps", max_steps, "Step limit (env FIRMFOLD_MAX_STEPS)")
      ->check(CLI::PositiveNumber);
  add_dialect(fold_cmd);

  std::string explore_input;
  std::string report_path;
  std::size_t max_states = kDefaultMaxStates;
  auto* explore_cmd = app.add_subcommand("explore", "Explore every rewrite order and check confluence");
  explore_cmd->add_option("input", explore_input, "GXL file")->required();
  explore_cmd->add_option("--max-states", max_states, "State limit")->check(CLI::PositiveNumber);
  explore_cmd->add_option("--report", report_path, "Write the report here instead of stdout");
  add_dialect(explore_cmd);

  std::int32_t a = 3;
  std::int32_t b = 5;
  std::string rel = "lt";
  std::string example_output;
  auto* example_cmd = app.add_subcommand("example", "Write the min-plus-one example graph");
  example_cmd->add_option("--a", a, "First constant")->capture_default_str();
  example_cmd->add_option("--b", b, "Second constant")->capture_default_str();
  example_cmd->add_option("--rel", rel, "Comparison relation")
      ->check(CLI::IsMember(relations))
      ->capture_default_str();
  example_cmd->add_option("-o,--output", example_output, "Output path (default: stdout)");

  std::vector<const char*> argv{"firmfold"};
  for (const auto& arg : args) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (fold_cmd->parsed()) fold_opts.max_steps = max_steps ? *max_steps : default_max_steps();
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (verify_cmd->parsed()) return cmd_verify(verify_input, dialect, out);
    if (fold_cmd->parsed()) {
      fold_opts.dialect = dialect;
      return cmd_fold(fold_opts, out, err);
    }
    if (explore_cmd->parsed()) {
      return cmd_explore(explore_input, dialect, max_states, report_path, out, err);
    }
    return cmd_example(a, b, rel, example_output, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  }
  return kUsage;
}

}  // namespace firmfold::cli
