#include "ordibound/report.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "ordibound/error.hpp"
#include "ordibound/transport.hpp"

namespace ordibound {

namespace {

Json tuple_json(const std::optional<TupleIndex>& t) {
  if (!t) return nullptr;
  return Json{{"j", t->j}, {"m", t->m}};
}

std::optional<TupleIndex> tuple_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return TupleIndex{j.at("j").get<int>(), j.at("m").get<int>()};
}

Json table_json(const std::vector<TupleValue>& table) {
  Json out = Json::array();
  for (const auto& e : table) out.push_back({{"j", e.index.j}, {"m", e.index.m}, {"value", e.value}});
  return out;
}

std::vector<TupleValue> table_from(const Json& j) {
  std::vector<TupleValue> out;
  for (const auto& e : j) out.push_back({{e.at("j").get<int>(), e.at("m").get<int>()}, e.at("value").get<double>()});
  return out;
}

Json probs_json(const MarginalDistribution& p) { return Json(std::vector<double>(p.probs().begin(), p.probs().end())); }

Json bounds_json(const BoundsReport& b) {
  return {{"gamma_lower", b.gamma_lower},
          {"gamma_independent", b.gamma_independent},
          {"gamma_upper", b.gamma_upper},
          {"argmin_upper", tuple_json(b.argmin_upper)},
          {"argmax_lower", tuple_json(b.argmax_lower)},
          {"delta_table", table_json(b.delta_table)},
          {"xi_table", table_json(b.xi_table)}};
}

BoundsReport bounds_from(const Json& j) {
  BoundsReport b;
  b.gamma_lower = j.at("gamma_lower").get<double>();
  b.gamma_independent = j.at("gamma_independent").get<double>();
  b.gamma_upper = j.at("gamma_upper").get<double>();
  b.argmin_upper = tuple_from(j.at("argmin_upper"));
  b.argmax_lower = tuple_from(j.at("argmax_lower"));
  b.delta_table = table_from(j.at("delta_table"));
  b.xi_table = table_from(j.at("xi_table"));
  return b;
}

Json interval_json(const IntervalReport& r) {
  const auto& s = r.replicate_summary;
  return {{"lower", r.lower},
          {"upper", r.upper},
          {"alpha", r.alpha},
          {"z_star", r.z_star},
          {"B", r.B},
          {"seed", r.seed},
          {"point_independent", r.point_independent},
          {"point_upper", r.point_upper},
          {"failed_replicates", r.failed_replicates},
          {"replicate_summary",
           {{"mean_independent", s.mean_independent},
            {"sd_independent", s.sd_independent},
            {"mean_upper", s.mean_upper},
            {"sd_upper", s.sd_upper}}}};
}

IntervalReport interval_from(const Json& j) {
  IntervalReport r;
  r.lower = j.at("lower").get<double>();
  r.upper = j.at("upper").get<double>();
  r.alpha = j.at("alpha").get<double>();
  r.z_star = j.at("z_star").get<double>();
  r.B = j.at("B").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.point_independent = j.at("point_independent").get<double>();
  r.point_upper = j.at("point_upper").get<double>();
  r.failed_replicates = j.at("failed_replicates").get<int>();
  const auto& s = j.at("replicate_summary");
  r.replicate_summary = {s.at("mean_independent").get<double>(), s.at("sd_independent").get<double>(),
                         s.at("mean_upper").get<double>(), s.at("sd_upper").get<double>()};
  return r;
}

Json matrix_json(const JointMatrix& P) {
  Json rows = Json::array();
  for (std::size_t k = 0; k < P.categories(); ++k) {
    Json row = Json::array();
    for (std::size_t l = 0; l < P.categories(); ++l) row.push_back(P(k, l));
    rows.push_back(std::move(row));
  }
  return {{"categories", P.categories()}, {"rows", std::move(rows)}};
}

JointMatrix matrix_from(const Json& j) {
  const auto J = j.at("categories").get<std::size_t>();
  JointMatrix P(J);
  const auto& rows = j.at("rows");
  if (rows.size() != J) throw Error(ErrorKind::DimensionMismatch, "matrix row count disagrees with categories");
  for (std::size_t k = 0; k < J; ++k) {
    if (rows[k].size() != J) throw Error(ErrorKind::DimensionMismatch, "matrix row has the wrong length");
    for (std::size_t l = 0; l < J; ++l) P(k, l) = rows[k][l].get<double>();
  }
  return P;
}

Json validation_json(const ValidationReport& v) {
  return {{"ok", v.ok()},
          {"nonnegative", v.nonnegative},
          {"rows_match", v.rows_match},
          {"cols_match", v.cols_match},
          {"gamma_matches", v.gamma_matches},
          {"min_entry", v.min_entry},
          {"max_row_deviation", v.max_row_deviation},
          {"max_col_deviation", v.max_col_deviation},
          {"gamma", v.gamma},
          {"gamma_deviation", v.gamma_deviation}};
}

ValidationReport validation_from(const Json& j) {
  ValidationReport v;
  v.nonnegative = j.at("nonnegative").get<bool>();
  v.rows_match = j.at("rows_match").get<bool>();
  v.cols_match = j.at("cols_match").get<bool>();
  v.gamma_matches = j.at("gamma_matches").get<bool>();
  v.min_entry = j.at("min_entry").get<double>();
  v.max_row_deviation = j.at("max_row_deviation").get<double>();
  v.max_col_deviation = j.at("max_col_deviation").get<double>();
  v.gamma = j.at("gamma").get<double>();
  v.gamma_deviation = j.at("gamma_deviation").get<double>();
  return v;
}

// Uniform double in (0, 1].
double unit_draw(SplitMix64& rng) { return (static_cast<double>(rng.next() >> 11) + 1.0) * 0x1.0p-53; }

std::vector<double> random_probs(SplitMix64& rng, std::size_t J) {
  const bool sparse = unit_draw(rng) < 0.2;
  std::vector<double> p(J);
  double total = 0.0;
  for (auto& x : p) {
    x = (sparse && unit_draw(rng) < 0.4) ? 0.0 : -std::log(unit_draw(rng));
    total += x;
  }
  if (total == 0.0) {
    p[rng.below(J)] = 1.0;
    return p;
  }
  for (auto& x : p) x /= total;
  return p;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

Json to_json(const AnalysisReport& r) {
  Json j;
  j["command"] = r.command;
  if (r.bounds) j["bounds"] = bounds_json(*r.bounds);
  if (r.marginals) j["marginals"] = {{"treated", probs_json(r.marginals->treated)}, {"control", probs_json(r.marginals->control)}};
  if (r.interval) j["interval"] = interval_json(*r.interval);
  if (r.attaining_matrix) j["attaining_matrix"] = matrix_json(*r.attaining_matrix);
  if (r.attainment_validation) j["attainment_validation"] = validation_json(*r.attainment_validation);
  if (r.oracle_check) {
    const auto& o = *r.oracle_check;
    j["oracle_check"] = {{"lp_lower", o.lp_lower},
                         {"lp_upper", o.lp_upper},
                         {"lower_deviation", o.lower_deviation},
                         {"upper_deviation", o.upper_deviation},
                         {"tolerance", o.tolerance},
                         {"agrees", o.agrees()}};
  }
  if (r.oracle_sweep) {
    const auto& s = *r.oracle_sweep;
    j["oracle_sweep"] = {{"trials", s.trials},
                         {"max_categories", s.max_categories},
                         {"seed", s.seed},
                         {"instances", s.instances},
                         {"max_upper_deviation", s.max_upper_deviation},
                         {"max_lower_deviation", s.max_lower_deviation},
                         {"bound_failures", s.bound_failures},
                         {"attainment_failures", s.attainment_failures},
                         {"tolerance", s.tolerance},
                         {"passed", s.passed()}};
  }
  j["provenance"] = {{"tool", r.provenance.tool},
                     {"version", r.provenance.version},
                     {"input_digest", r.provenance.input_digest},
                     {"config", r.provenance.config}};
  return j;
}

AnalysisReport report_from_json(const Json& j) {
  AnalysisReport r;
  r.command = j.at("command").get<std::string>();
  if (j.contains("bounds")) r.bounds = bounds_from(j.at("bounds"));
  if (j.contains("marginals")) {
    const auto& m = j.at("marginals");
    r.marginals = MarginalPair{MarginalDistribution(m.at("treated").get<std::vector<double>>()),
                               MarginalDistribution(m.at("control").get<std::vector<double>>())};
  }
  if (j.contains("interval")) r.interval = interval_from(j.at("interval"));
  if (j.contains("attaining_matrix")) r.attaining_matrix = matrix_from(j.at("attaining_matrix"));
  if (j.contains("attainment_validation")) r.attainment_validation = validation_from(j.at("attainment_validation"));
  if (j.contains("oracle_check")) {
    const auto& o = j.at("oracle_check");
    r.oracle_check = OracleCheck{o.at("lp_lower").get<double>(), o.at("lp_upper").get<double>(),
                                 o.at("lower_deviation").get<double>(), o.at("upper_deviation").get<double>(),
                                 o.at("tolerance").get<double>()};
  }
  if (j.contains("oracle_sweep")) {
    const auto& s = j.at("oracle_sweep");
    OracleSweep w;
    w.trials = s.at("trials").get<int>();
    w.max_categories = s.at("max_categories").get<int>();
    w.seed = s.at("seed").get<std::uint64_t>();
    w.instances = s.at("instances").get<int>();
    w.max_upper_deviation = s.at("max_upper_deviation").get<double>();
    w.max_lower_deviation = s.at("max_lower_deviation").get<double>();
    w.bound_failures = s.at("bound_failures").get<int>();
    w.attainment_failures = s.at("attainment_failures").get<int>();
    w.tolerance = s.at("tolerance").get<double>();
    r.oracle_sweep = w;
  }
  const auto& p = j.at("provenance");
  r.provenance.tool = p.at("tool").get<std::string>();
  r.provenance.version = p.at("version").get<std::string>();
  r.provenance.input_digest = p.at("input_digest").get<std::string>();
  r.provenance.config = p.at("config");
  return r;
}

std::string serialize(const AnalysisReport& report) { return to_json(report).dump(); }

AnalysisReport parse_report(const std::string& text) {
  try {
    return report_from_json(Json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedRow, std::string("report JSON: ") + e.what());
  }
}

std::string pretty_summary(const AnalysisReport& r) {
  std::ostringstream out;
  out << kToolName << ' ' << kToolVersion << "  " << r.command << '\n';
  if (r.marginals) {
    const auto line = [&](const char* name, const MarginalDistribution& p) {
      out << "  " << name;
      for (double v : p.probs()) out << ' ' << fixed(v, 4);
      out << '\n';
    };
    out << "marginals\n";
    line("treated", r.marginals->treated);
    line("control", r.marginals->control);
  }
  if (r.bounds) {
    const auto& b = *r.bounds;
    out << "bounds on gamma\n"
        << "  lower        " << fixed(b.gamma_lower) << '\n'
        << "  independent  " << fixed(b.gamma_independent) << '\n'
        << "  upper        " << fixed(b.gamma_upper);
    if (b.argmin_upper) out << "  at (j, m) = (" << b.argmin_upper->j << ", " << b.argmin_upper->m << ')';
    out << '\n';
  }
  if (r.interval) {
    const auto& i = *r.interval;
    out << fixed(100 * (1 - i.alpha), 1) << "% interval for [gamma_I, gamma_U]: [" << fixed(i.lower) << ", "
        << fixed(i.upper) << "]  (z* = " << fixed(i.z_star) << ", B = " << i.B << ", seed = " << i.seed
        << ", failed = " << i.failed_replicates << ")\n";
  }
  if (r.attaining_matrix) {
    out << "attaining coupling (rows treated, columns control)\n";
    const auto& P = *r.attaining_matrix;
    for (std::size_t k = 0; k < P.categories(); ++k) {
      out << ' ';
      for (std::size_t l = 0; l < P.categories(); ++l) out << ' ' << fixed(P(k, l));
      out << '\n';
    }
  }
  if (r.attainment_validation) {
    const auto& v = *r.attainment_validation;
    out << "validation: " << (v.ok() ? "ok" : "FAILED " + v.first_failure()) << "  gamma " << fixed(v.gamma, 9)
        << '\n';
  }
  if (r.oracle_check) {
    const auto& o = *r.oracle_check;
    out << "LP check: [" << fixed(o.lp_lower) << ", " << fixed(o.lp_upper) << "]  max deviation "
        << std::max(o.lower_deviation, o.upper_deviation) << (o.agrees() ? "  ok" : "  MISMATCH") << '\n';
  }
  if (r.oracle_sweep) {
    const auto& s = *r.oracle_sweep;
    out << "oracle sweep: " << s.instances << " instances, J in 2.." << s.max_categories << ", seed " << s.seed
        << "\n  max |closed form - LP|: upper " << s.max_upper_deviation << ", lower " << s.max_lower_deviation
        << "\n  bound failures " << s.bound_failures << ", attainment failures " << s.attainment_failures
        << (s.passed() ? "  PASS" : "  FAIL") << '\n';
  }
  out << "input " << r.provenance.input_digest << '\n';
  return out.str();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::EstimationError, "SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

OracleCheck oracle_check(const MarginalDistribution& p1, const MarginalDistribution& p0, const BoundsReport& bounds) {
  const auto lp = lp_gamma_bounds(p1, p0);
  OracleCheck o;
  o.lp_lower = lp.lower;
  o.lp_upper = lp.upper;
  o.lower_deviation = std::abs(lp.lower - bounds.gamma_lower);
  o.upper_deviation = std::abs(lp.upper - bounds.gamma_upper);
  return o;
}

OracleSweep oracle_sweep(int trials, int max_categories, std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorKind::Usage, "--trials must be positive");
  if (max_categories < 2) throw Error(ErrorKind::Usage, "--max-categories must be at least 2");
  OracleSweep s;
  s.trials = trials;
  s.max_categories = max_categories;
  s.seed = seed;
  for (int t = 0; t < trials; ++t) {
    auto rng = SplitMix64::for_replicate(seed, static_cast<std::uint64_t>(t));
    const std::size_t J = 2 + rng.below(static_cast<std::uint64_t>(max_categories - 1));
    const auto p1 = validate_marginal(random_probs(rng, J));
    const auto p0 = validate_marginal(random_probs(rng, J));
    ++s.instances;
    const auto bounds = compute_bounds(p1, p0);
    const auto o = oracle_check(p1, p0, bounds);
    s.max_upper_deviation = std::max(s.max_upper_deviation, o.upper_deviation);
    s.max_lower_deviation = std::max(s.max_lower_deviation, o.lower_deviation);
    if (!o.agrees()) ++s.bound_failures;
    try {
      const bool up = validate_attainment(construct_attaining_matrix(p1, p0), p1, p0, bounds.gamma_upper).ok();
      const bool lo =
          validate_attainment(construct_lower_attaining_matrix(p1, p0), p1, p0, bounds.gamma_lower).ok();
      if (!up || !lo) ++s.attainment_failures;
    } catch (const Error&) {
      ++s.attainment_failures;
    }
  }
  return s;
}

}  // namespace ordibound
