#include "ordibound/cli.hpp"

#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "ordibound/attainment.hpp"
#include "ordibound/bootstrap.hpp"
#include "ordibound/error.hpp"
#include "ordibound/io.hpp"
#include "ordibound/report.hpp"

namespace ordibound {

namespace {

struct InputOptions {
  std::string file;
  std::string treated_counts, control_counts;
  std::string treated_probs, control_probs;
  std::optional<std::size_t> categories;
};

struct Options {
  InputOptions input;
  std::string design = "cre";
  double alpha = kDefaultAlpha;
  int boot = kDefaultReplicates;
  std::uint64_t seed = 0;
  int trials = 1000;
  int max_categories = 8;
  bool pretty = false;
};

// Resolved input: marginals always, unit data when the source has units.
struct Input {
  std::optional<CountTable> counts;
  std::optional<Dataset> units;
  MarginalPair marginals{MarginalDistribution({}), MarginalDistribution({})};
  std::string digest;
  Json source;
};

void add_marginal_inputs(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("input", in.file, "count file or unit-level CSV");
  cmd->add_option("--treated-counts", in.treated_counts, "treated arm counts, comma-separated");
  cmd->add_option("--control-counts", in.control_counts, "control arm counts, comma-separated");
  cmd->add_option("--treated-probs", in.treated_probs, "treated marginal probabilities, comma-separated");
  cmd->add_option("--control-probs", in.control_probs, "control marginal probabilities, comma-separated");
  cmd->add_option("--categories", in.categories, "number of outcome categories for CSV input");
}

Input resolve_input(const InputOptions& in, bool need_units) {
  const bool has_file = !in.file.empty();
  const bool has_counts = !in.treated_counts.empty() || !in.control_counts.empty();
  const bool has_probs = !in.treated_probs.empty() || !in.control_probs.empty();
  if (has_file + has_counts + has_probs != 1)
    throw Error(ErrorKind::Usage, "give exactly one input: a file, --treated-counts/--control-counts, or "
                                  "--treated-probs/--control-probs");
  Input result;
  if (has_probs) {
    if (in.treated_probs.empty() || in.control_probs.empty())
      throw Error(ErrorKind::Usage, "--treated-probs and --control-probs go together");
    if (need_units) throw Error(ErrorKind::Usage, "this command needs unit data or counts, not probabilities");
    result.marginals = {parse_probability_list(in.treated_probs), parse_probability_list(in.control_probs)};
    if (result.marginals.treated.categories() != result.marginals.control.categories())
      throw Error(ErrorKind::LengthMismatch, "treated and control probability vectors differ in length");
    result.digest =
        "sha256:" + sha256_hex("treated-probs=" + in.treated_probs + "\ncontrol-probs=" + in.control_probs + "\n");
    result.source = {{"kind", "probabilities"}};
    return result;
  }
  if (has_counts) {
    if (in.treated_counts.empty() || in.control_counts.empty())
      throw Error(ErrorKind::Usage, "--treated-counts and --control-counts go together");
    result.counts = parse_count_lists(in.treated_counts, in.control_counts);
    result.digest =
        sha256_hex("treated-counts=" + in.treated_counts + "\ncontrol-counts=" + in.control_counts + "\n");
    result.source = {{"kind", "counts"}};
  } else {
    const std::string text = read_file(in.file);
    result.digest = sha256_hex(text);
    if (looks_like_count_file(text)) {
      result.counts = parse_count_text(text);
      result.source = {{"kind", "count-file"}, {"path", in.file}};
    } else {
      result.units = parse_unit_csv_text(text, in.categories);
      result.source = {{"kind", "unit-csv"}, {"path", in.file}};
    }
  }
  if (result.counts) {
    if (in.categories && *in.categories != result.counts->categories())
      throw Error(ErrorKind::LengthMismatch, "--categories disagrees with the count table");
    result.marginals = count_marginals(*result.counts);
    if (need_units) result.units = dataset_from_counts(result.counts->treated, result.counts->control);
  } else {
    validate_dataset(*result.units);
    result.marginals = estimate_marginals_cre(*result.units);
  }
  result.digest = "sha256:" + result.digest;
  return result;
}

EstimatorConfig estimator_config(const std::string& design) {
  const auto d = parse_design(design);
  if (!d) throw Error(ErrorKind::Usage, "unknown design '" + design + "'");
  EstimatorConfig c;
  c.design = *d;
  return c;
}

void print(const AnalysisReport& r, bool pretty, std::ostream& out) {
  if (pretty) out << pretty_summary(r);
  else out << serialize(r) << '\n';
}

Json error_json(std::string_view kind, std::string_view cls, const std::string& message) {
  return {{"error", {{"kind", kind}, {"class", cls}, {"message", message}}}};
}

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::Usage: return kExitUsage;
    case ErrorClass::Data: return kExitData;
    case ErrorClass::Numerical: return kExitNumerical;
  }
  return kExitNumerical;
}

std::string_view class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::Usage: return "usage";
    case ErrorClass::Data: return "data";
    case ErrorClass::Numerical: return "numerical";
  }
  return "numerical";
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sharp bounds on the relative treatment effect for ordinal outcomes", "ordibound"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  Options o;

  auto* bounds = app.add_subcommand("bounds", "closed-form bounds from counts, probabilities or a data file");
  add_marginal_inputs(bounds, o.input);

  auto* attain = app.add_subcommand("attain", "coupling that attains the upper bound, with its validation");
  add_marginal_inputs(attain, o.input);

  auto* est = app.add_subcommand("estimate", "estimated bounds from unit data under a design");
  add_marginal_inputs(est, o.input);
  est->add_option("--design", o.design, "cre | ipw | outcome-regression | covariate-sharpened");

  auto* ci = app.add_subcommand("ci", "bootstrap confidence interval for the identified set");
  add_marginal_inputs(ci, o.input);
  ci->add_option("--design", o.design, "cre | ipw | outcome-regression | covariate-sharpened");
  ci->add_option("--alpha", o.alpha, "1 - confidence level")->check(CLI::Range(0.0, 1.0));
  ci->add_option("--boot", o.boot, "bootstrap replicates")->check(CLI::PositiveNumber);
  ci->add_option("--seed", o.seed, "64-bit seed");

  auto* oc = app.add_subcommand("oracle-check", "random closed-form versus LP comparison");
  oc->add_option("--trials", o.trials, "number of random marginal pairs")->check(CLI::PositiveNumber);
  oc->add_option("--max-categories", o.max_categories, "largest J to draw")->check(CLI::Range(2, 64));
  oc->add_option("--seed", o.seed, "64-bit seed (default 1)");

  for (auto* cmd : {bounds, attain, est, ci, oc}) cmd->add_flag("--pretty", o.pretty, "human-readable summary");

  std::vector<std::string> argv_store{"ordibound"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    Json j = error_json("Usage", "usage", e.what());
    j["error"]["usage"] = subs.empty() ? app.help() : subs.front()->help();
    err << j.dump() << '\n';
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (command == "oracle-check" && oc->count("--seed") == 0) o.seed = 1;

  try {
    AnalysisReport report;
    report.command = command;
    Json config = {{"command", command}};

    if (command == "oracle-check") {
      report.oracle_sweep = oracle_sweep(o.trials, o.max_categories, o.seed);
      config["trials"] = o.trials;
      config["max_categories"] = o.max_categories;
      config["seed"] = o.seed;
      report.provenance.input_digest = "none";
      report.provenance.config = config;
      print(report, o.pretty, out);
      return report.oracle_sweep->passed() ? kExitOk : kExitNumerical;
    }

    const bool need_units = command == "estimate" || command == "ci";
    Input input = resolve_input(o.input, need_units);
    config["input"] = input.source;
    if (o.input.categories) config["categories"] = *o.input.categories;
    report.provenance.input_digest = input.digest;

    if (command == "bounds") {
      report.marginals = input.marginals;
      report.bounds = compute_bounds(input.marginals.treated, input.marginals.control);
      report.oracle_check = oracle_check(input.marginals.treated, input.marginals.control, *report.bounds);
    } else if (command == "attain") {
      const auto& [p1, p0] = input.marginals;
      report.marginals = input.marginals;
      report.bounds = compute_bounds(p1, p0);
      const auto attained = attain_upper_bound(p1, p0);
      report.attaining_matrix = attained.matrix;
      report.attainment_validation = validate_attainment(attained.matrix, p1, p0, report.bounds->gamma_upper);
      config["tuple"] = {{"j", attained.plan.j1}, {"m", attained.plan.m1}};
    } else {
      const auto cfg = estimator_config(o.design);
      config["design"] = std::string(to_string(cfg.design));
      const auto e = estimate(*input.units, cfg);
      report.marginals = e.marginals;
      report.bounds = e.bounds;
      if (command == "ci") {
        config["alpha"] = o.alpha;
        config["boot"] = o.boot;
        config["seed"] = o.seed;
        report.interval = bootstrap_interval(*input.units, cfg, o.alpha, o.boot, o.seed);
      }
    }
    report.provenance.config = config;
    print(report, o.pretty, out);
    if (report.oracle_check && !report.oracle_check->agrees()) return kExitNumerical;
    return kExitOk;
  } catch (const Error& e) {
    const auto cls = classify(e.kind());
    err << error_json(to_string(e.kind()), class_name(cls), e.what()).dump() << '\n';
    return exit_code(cls);
  } catch (const std::exception& e) {
    err << error_json("Internal", "numerical", e.what()).dump() << '\n';
    return kExitNumerical;
  }
}

}  // namespace ordibound
