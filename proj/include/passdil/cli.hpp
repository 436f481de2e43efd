#ifndef PASSDIL_CLI_HPP
#define PASSDIL_CLI_HPP

#include "passdil/dilation.hpp"
#include "passdil/gaussian.hpp"
#include "passdil/io.hpp"
#include "passdil/normal_form.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace passdil::cli {

/// Process exit codes shared by every subcommand.
enum ExitCode : int { kAffirmative = 0, kNegative = 1, kInputError = 2 };

using io::Json;

namespace detail {

struct Loaded {
  io::ChannelFile file;
  std::string digest;
};

inline Loaded load_channel(const std::string& path, const Tolerance& tol) {
  const std::string text = io::read_file(path);
  return {io::channel_from_json(io::parse_text(text), tol), io::sha256_hex(text)};
}

inline Json report_header(const char* command, const Json& digests, const Tolerance& tol) {
  return {{"command", command},
          {"input_digest", digests},
          {"tolerance", {{"rel", tol.rel}, {"abs", tol.abs}}},
          {"verdicts", Json::object()},
          {"residuals", Json::object()}};
}

inline void verdict(Json& report, const char* key, bool value, double residual) {
  report["verdicts"][key] = value;
  report["residuals"][key] = residual;
}

inline void add_dilatability(Json& report, const DilatabilityReport& r) {
  verdict(report, "psd_ok", r.psd_ok, std::max(0.0, -r.sigma_hat_min_eigenvalue));
  verdict(report, "commutes_ok", r.commutes_ok, r.commutator_residual);
  verdict(report, "kernel_ok", r.kernel_ok, r.kernel_residual);
  verdict(report, "modes_ok", r.modes_ok,
          std::max(0.0, static_cast<double>(r.rank_sigma_hat) - 2.0 * static_cast<double>(r.modes)));
  verdict(report, "dilatable", r.overall(),
          std::max({std::max(0.0, -r.sigma_hat_min_eigenvalue), r.commutator_residual,
                    r.kernel_residual}));
  report["values"]["modes"] = r.modes;
  report["values"]["rank_sigma_hat"] = r.rank_sigma_hat;
  report["values"]["rank_y"] = r.rank_y;
  if (!r.overall()) report["failure"] = r.failure();
}

inline void add_verification(Json& report, const DilationVerification& v) {
  verdict(report, "verified", v.ok, v.max_residual());
  report["residuals"]["eq_sigma"] = v.sigma_residual;
  report["residuals"]["eq_sigma_hat"] = v.sigma_hat_residual;
  report["residuals"]["eq_noise"] = v.noise_residual;
  report["residuals"]["s1"] = v.s1_residual;
  report["residuals"]["orthogonality"] = v.membership.orthogonality_residual;
  report["residuals"]["symplecticity"] = v.membership.symplectic_residual;
  report["residuals"]["action"] = v.action_residual;
  verdict(report, "environment_valid", v.environment_valid,
          std::max(0.0, -v.environment_min_eigenvalue));
  if (!v.ok) report["failure"] = v.failure;
}

/// Writes the report; a negative verdict also names its cause on `err`.
inline int finish(std::ostream& out, std::ostream& err, const Json& report, int code) {
  out << io::dump(report);
  if (code == kNegative && report.contains("failure"))
    err << "passdil: " << report.at("failure").get<std::string>() << "\n";
  return code;
}

inline std::string artifact_path(const std::string& prefix, const char* suffix) {
  return prefix + suffix;
}

}  // namespace detail

struct Options {
  std::string channel;
  std::string dilation;
  std::string out;
  std::optional<Eigen::Index> modes;
  double tol = Tolerance{}.rel;
  std::string ordering = "blocked";
  Eigen::Index n = 1;
  Eigen::Index l = 1;
  bool passive_env = false;
  std::uint64_t seed = 0;
};

inline Tolerance tolerance(const Options& o) {
  Tolerance t;
  t.rel = o.tol;
  t.validate();
  return t;
}

inline int cmd_check(const Options& o, std::ostream& out, std::ostream& err) {
  const Tolerance tol = tolerance(o);
  const auto in = detail::load_channel(o.channel, tol);
  const GaussianChannel& c = in.file.channel;
  const auto probe = check_dilatable(c, c.modes(), tol);
  const Eigen::Index l = o.modes.value_or(probe.min_modes);
  const auto r = check_dilatable(c, l, tol);

  Json report = detail::report_header("check", {{"channel", in.digest}}, tol);
  detail::add_dilatability(report, r);
  report["values"]["min_modes"] = r.min_modes;
  report["values"]["minimal_modes"] =
      r.dilatable() ? Json(static_cast<Eigen::Index>(r.rank_y / 2)) : Json(nullptr);
  const double y_comm = sigma_commutator(c.y);
  const bool y_commutes = y_comm <= tol.bound(std::max(1.0, max_abs(c.y)));
  detail::verdict(report, "y_commutes_sigma", y_commutes, y_comm);
  detail::verdict(report, "passive", r.dilatable() && y_commutes, y_comm);
  return detail::finish(out, err, report, r.overall() ? kAffirmative : kNegative);
}

inline int cmd_dilate(const Options& o, std::ostream& out, std::ostream& err) {
  const Tolerance tol = tolerance(o);
  const ModeOrdering ordering = parse_ordering(o.ordering);
  const auto in = detail::load_channel(o.channel, tol);
  const GaussianChannel& c = in.file.channel;
  const Eigen::Index l = o.modes.value_or(check_dilatable(c, c.modes(), tol).min_modes);
  const auto r = check_dilatable(c, l, tol);

  Json report = detail::report_header("dilate", {{"channel", in.digest}}, tol);
  detail::add_dilatability(report, r);
  if (!r.overall()) {
    return detail::finish(out, err, report, kNegative);
  }
  const auto dil = construct_dilation(c, l, tol);
  const auto v = verify_dilation(c, dil, tol);
  detail::add_verification(report, v);

  Json doc = io::dilation_to_json(dil, ordering);
  doc["verification"] = io::verification_to_json(v);
  if (!o.out.empty()) {
    io::write_file(o.out, io::dump(doc));
    report["artifacts"]["dilation_file"] = o.out;
  }
  report["artifacts"]["dilation"] = doc;
  return detail::finish(out, err, report, v.ok ? kAffirmative : kNegative);
}

inline int cmd_normal_form(const Options& o, std::ostream& out, std::ostream& err) {
  const Tolerance tol = tolerance(o);
  const ModeOrdering ordering = parse_ordering(o.ordering);
  const auto in = detail::load_channel(o.channel, tol);
  const GaussianChannel& c = in.file.channel;
  const auto r = check_dilatable(c, c.modes(), tol);

  Json report = detail::report_header("normal-form", {{"channel", in.digest}}, tol);
  detail::add_dilatability(report, r);
  if (!r.overall()) {
    return detail::finish(out, err, report, kNegative);
  }
  const auto nf = compute_normal_form(c, tol);
  const auto back = reconstruct(nf, tol);
  const double residual = std::max(max_abs(back.x - c.x), max_abs(back.y - c.y));
  const bool ok = residual <= tol.bound(std::max({1.0, max_abs(c.x), max_abs(c.y)}));
  detail::verdict(report, "reconstructs", ok, residual);

  Json doc = io::normal_form_to_json(nf, ordering);
  doc["reconstruction_residual"] = residual;
  if (!o.out.empty()) {
    io::write_file(o.out, io::dump(doc));
    report["artifacts"]["normal_form_file"] = o.out;
  }
  report["artifacts"]["normal_form"] = doc;
  return detail::finish(out, err, report, ok ? kAffirmative : kNegative);
}

inline int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  const Tolerance tol = tolerance(o);
  const auto in = detail::load_channel(o.channel, tol);
  const std::string text = io::read_file(o.dilation);
  const auto dil = io::dilation_from_json(io::parse_text(text));
  const auto v = verify_dilation(in.file.channel, dil, tol);

  Json report = detail::report_header(
      "verify", {{"channel", in.digest}, {"dilation", io::sha256_hex(text)}}, tol);
  detail::add_verification(report, v);
  return detail::finish(out, err, report, v.ok ? kAffirmative : kNegative);
}

inline int cmd_random(const Options& o, std::ostream& out, std::ostream& err) {
  const Tolerance tol = tolerance(o);
  const ModeOrdering ordering = parse_ordering(o.ordering);
  const auto inst = random_dilatable_channel(o.n, o.l, o.passive_env, o.seed);
  const Json meta = {{"generator", "random"},
                     {"n", o.n},
                     {"l", o.l},
                     {"passive_env", o.passive_env},
                     {"seed", o.seed}};
  const Json channel_doc = io::channel_to_json(inst.channel, ordering, meta);
  const Json dilation_doc = io::dilation_to_json(inst.dilation, ordering);

  Json report = detail::report_header("random", Json::object(), tol);
  const auto v = verify_dilation(inst.channel, inst.dilation, tol);
  detail::add_verification(report, v);
  if (!o.out.empty()) {
    const std::string cpath = detail::artifact_path(o.out, "-channel.json");
    const std::string dpath = detail::artifact_path(o.out, "-dilation.json");
    io::write_file(cpath, io::dump(channel_doc));
    io::write_file(dpath, io::dump(dilation_doc));
    report["artifacts"]["channel_file"] = cpath;
    report["artifacts"]["dilation_file"] = dpath;
  }
  report["artifacts"]["channel"] = channel_doc;
  report["artifacts"]["dilation"] = dilation_doc;
  return detail::finish(out, err, report, v.ok ? kAffirmative : kNegative);
}

/// Parses argv-style arguments (without the program name) and runs the
/// selected subcommand. Reports go to `out`, diagnostics to `err`.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Passive dilations and normal forms of Gaussian channels", "passdil"};
  app.require_subcommand(1);
  Options o;

  auto add_tol = [&](CLI::App* sub) {
    sub->add_option("--tol", o.tol, "relative tolerance")->check(CLI::NonNegativeNumber);
  };
  auto add_ordering = [&](CLI::App* sub) {
    sub->add_option("--ordering", o.ordering, "ordering of emitted matrices")
        ->check(CLI::IsMember({"blocked", "interleaved"}));
  };

  auto* check = app.add_subcommand("check", "decide passive dilatability");
  check->add_option("channel", o.channel, "channel file")->required();
  check->add_option("--modes", o.modes, "environment modes (default: minimal)");
  add_tol(check);

  auto* dilate = app.add_subcommand("dilate", "construct a passive dilation");
  dilate->add_option("channel", o.channel, "channel file")->required();
  dilate->add_option("--modes", o.modes, "environment modes (default: minimal)");
  dilate->add_option("--out", o.out, "dilation output file");
  add_tol(dilate);
  add_ordering(dilate);

  auto* normal = app.add_subcommand("normal-form", "factor into passive o additive o passive");
  normal->add_option("channel", o.channel, "channel file")->required();
  normal->add_option("--out", o.out, "normal-form output file");
  add_tol(normal);
  add_ordering(normal);

  auto* verify = app.add_subcommand("verify", "verify a dilation against a channel");
  verify->add_option("channel", o.channel, "channel file")->required();
  verify->add_option("dilation", o.dilation, "dilation file")->required();
  add_tol(verify);

  auto* random = app.add_subcommand("random", "emit a random dilatable channel and its dilation");
  random->add_option("--n", o.n, "system modes")->check(CLI::PositiveNumber);
  random->add_option("--l", o.l, "environment modes")->check(CLI::PositiveNumber);
  random->add_flag("--passive-env", o.passive_env, "passive environment state");
  random->add_option("--seed", o.seed, "random seed")->required();
  random->add_option("--out", o.out, "output prefix (<prefix>-channel.json, <prefix>-dilation.json)");
  add_tol(random);
  add_ordering(random);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kAffirmative;
  } catch (const CLI::ParseError& e) {
    err << "passdil: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (*check) return cmd_check(o, out, err);
    if (*dilate) return cmd_dilate(o, out, err);
    if (*normal) return cmd_normal_form(o, out, err);
    if (*verify) return cmd_verify(o, out, err);
    return cmd_random(o, out, err);
  } catch (const InvalidInput& e) {
    err << "passdil: " << e.what() << "\n";
    return kInputError;
  } catch (const NotDilatable& e) {
    err << "passdil: " << e.what() << "\n";
    return kNegative;
  } catch (const Error& e) {
    err << "passdil: " << e.what() << "\n";
    return kNegative;
  }
}

}  // namespace passdil::cli

#endif  // PASSDIL_CLI_HPP
