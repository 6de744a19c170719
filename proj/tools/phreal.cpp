#include <complex>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <phr/phr.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitIrregular = 3;
constexpr int kExitNotPr = 4;
constexpr int kExitUnknown = 5;
constexpr int kExitInternal = 6;
constexpr int kExitVerification = 7;

struct GlobalFlags {
  bool json = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_rank;
  std::optional<double> tol_psd;
  std::optional<double> tol_residual;
  std::optional<double> tf_rtol;
  std::optional<int> samples;
};

phr::ToleranceConfig effective_config(const GlobalFlags& flags,
                                      const phr::SystemFile& file) {
  phr::ToleranceConfig cfg;
  if (file.tolerances) cfg = *file.tolerances;
  if (flags.tol_rank) cfg.rank_rtol = *flags.tol_rank;
  if (flags.tol_psd) cfg.psd_tol = *flags.tol_psd;
  if (flags.tol_residual) cfg.residual_tol = *flags.tol_residual;
  if (flags.tf_rtol) cfg.tf_rtol = *flags.tf_rtol;
  if (flags.samples) cfg.sample_count = *flags.samples;
  if (flags.seed) cfg.seed = *flags.seed;
  cfg.validate();
  return cfg;
}

std::string format_matrix(const phr::Matrix& m) {
  std::ostringstream out;
  out << m;
  return out.str();
}

void print_header(const phr::ToleranceConfig& cfg, const std::string& name) {
  std::cout << "phreal report";
  if (!name.empty()) std::cout << " for '" << name << "'";
  std::cout << "\ntolerances: rank_rtol=" << cfg.rank_rtol
            << " psd_tol=" << cfg.psd_tol
            << " residual_tol=" << cfg.residual_tol
            << " tf_rtol=" << cfg.tf_rtol
            << " samples=" << cfg.sample_count << " seed=" << cfg.seed << "\n";
}

nlohmann::json report_base(const phr::ToleranceConfig& cfg,
                           const std::string& command,
                           const std::string& name) {
  nlohmann::json j;
  j["command"] = command;
  if (!name.empty()) j["name"] = name;
  j["tolerances"] = phr::tolerances_to_json(cfg);
  return j;
}

void emit(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

int run_analyze(const std::string& path, const GlobalFlags& flags) {
  const phr::SystemFile file = phr::load_system_file(path);
  const phr::ToleranceConfig cfg = effective_config(flags, file);
  const phr::DescriptorSystem& sys = file.system;

  const auto reg = phr::check_regular(sys, cfg);
  if (!reg.regular) {
    if (flags.json) {
      auto j = report_base(cfg, "analyze", file.name);
      j["regular"] = false;
      emit(j);
    } else {
      print_header(cfg, file.name);
      std::cout << "regular: false\n";
    }
    return kExitIrregular;
  }

  const auto eigs = phr::generalized_eigenvalues(sys.E, sys.A, cfg);
  const int index = phr::pencil_index(sys.E, sys.A, cfg);
  const auto st = phr::controllability_observability_staircase(sys, cfg);
  const bool cc = phr::is_completely_controllable(sys, cfg);
  const bool co = phr::is_completely_observable(sys, cfg);
  const bool bo = phr::is_behaviorally_observable(sys, cfg);

  std::vector<std::complex<double>> finite;
  int infinite_count = 0;
  for (const auto& ev : eigs) {
    if (ev.finite) {
      finite.push_back(ev.value);
    } else {
      ++infinite_count;
    }
  }

  if (flags.json) {
    auto j = report_base(cfg, "analyze", file.name);
    j["regular"] = true;
    j["index"] = index;
    auto& fj = j["finite_eigenvalues"] = nlohmann::json::array();
    for (const auto& ev : finite) {
      fj.push_back({{"re", ev.real()}, {"im", ev.imag()}});
    }
    j["infinite_eigenvalue_count"] = infinite_count;
    j["completely_controllable"] = cc;
    j["completely_observable"] = co;
    j["behaviorally_observable"] = bo;
    j["staircase_blocks"] = st.block_sizes;
    emit(j);
  } else {
    print_header(cfg, file.name);
    std::cout << "regular: true\nindex: " << index << "\nfinite eigenvalues: [";
    for (std::size_t i = 0; i < finite.size(); ++i) {
      if (i) std::cout << ", ";
      std::cout << finite[i].real();
      if (finite[i].imag() != 0.0) {
        std::cout << (finite[i].imag() > 0 ? "+" : "") << finite[i].imag()
                  << "i";
      }
    }
    std::cout << "]\ninfinite eigenvalues: " << infinite_count
              << "\ncompletely controllable: " << (cc ? "true" : "false")
              << "\ncompletely observable: " << (co ? "true" : "false")
              << "\nbehaviorally observable: " << (bo ? "true" : "false")
              << "\nstaircase blocks: [";
    for (std::size_t i = 0; i < st.block_sizes.size(); ++i) {
      if (i) std::cout << ", ";
      std::cout << st.block_sizes[i];
    }
    std::cout << "]\n";
  }
  return kExitOk;
}

int run_check_pr(const std::string& path, const std::string& certificate_path,
                 const GlobalFlags& flags) {
  const phr::SystemFile file = phr::load_system_file(path);
  const phr::ToleranceConfig cfg = effective_config(flags, file);
  const phr::DescriptorSystem& sys = file.system;

  if (!phr::check_regular(sys, cfg).regular) {
    std::cerr << "error: pencil (E, A) is singular\n";
    return kExitIrregular;
  }

  auto j = report_base(cfg, "check-pr", file.name);
  if (!flags.json) print_header(cfg, file.name);

  if (!certificate_path.empty()) {
    std::ifstream in(certificate_path);
    if (!in) {
      throw phr::InvalidInputError("cannot open file: " + certificate_path);
    }
    nlohmann::json cj;
    try {
      in >> cj;
    } catch (const nlohmann::json::exception& e) {
      throw phr::InvalidInputError("cannot parse JSON in " + certificate_path +
                                   ": " + e.what());
    }
    const phr::Matrix q = phr::detail::matrix_from_json(cj.at("Q"), "Q");
    phr::Matrix w;
    if (cj.contains("W")) {
      w = phr::detail::matrix_from_json(cj.at("W"), "W");
    }
    const auto cert = phr::verify_pr_certificate(sys, q, w, cfg);
    const phr::Matrix lmi = phr::detail::kyp_lmi_matrix(sys, cert.Q, cert.W);
    if (flags.json) {
      j["certificate"] = phr::certificate_to_json(cert);
      j["lmi"] = phr::detail::matrix_to_json(lmi);
      j["verdict"] =
          cert.valid ? "certified-positive-real" : "certificate-rejected";
      emit(j);
    } else {
      std::cout << "verdict: "
                << (cert.valid ? "certified-positive-real"
                               : "certificate-rejected")
                << "\nLMI matrix:\n"
                << format_matrix(lmi) << "\nlmi_margin: " << cert.lmi_margin
                << "\netq_psd_margin: " << cert.etq_psd_margin
                << "\netq_sym_residual: " << cert.etq_sym_residual
                << "\netw_residual: " << cert.etw_residual << "\n";
    }
    return cert.valid ? kExitOk : kExitVerification;
  }

  const auto nec = phr::check_necessary_conditions(sys, cfg);
  const auto verdict = phr::check_pr_sampling(sys, cfg);
  std::string label;
  int code = kExitUnknown;
  switch (verdict.status) {
    case phr::PrStatus::certified:
    case phr::PrStatus::sampled_pr:
      label = "sampled-positive-real";
      code = kExitOk;
      break;
    case phr::PrStatus::not_pr:
      label = "not-positive-real";
      code = kExitNotPr;
      break;
    case phr::PrStatus::unknown:
      label = "unknown";
      code = kExitUnknown;
      break;
  }
  if (!nec.all_ok()) {
    label = "not-positive-real";
    code = kExitNotPr;
  }
  if (flags.json) {
    j["verdict"] = label;
    j["samples_evaluated"] = verdict.samples_evaluated;
    j["worst_margin"] = verdict.worst_margin;
    j["necessary_conditions"] = {
        {"index", nec.index},
        {"index_ok", nec.index_ok},
        {"spectrum_ok", nec.spectrum_ok},
        {"range_ok", nec.range_ok},
        {"feedthrough_ok", nec.feedthrough_ok},
        {"feedthrough_applicable", nec.feedthrough_applicable}};
    if (verdict.status == phr::PrStatus::not_pr) {
      j["witness"] = {{"re", verdict.witness_point.real()},
                      {"im", verdict.witness_point.imag()},
                      {"violation", verdict.witness_violation}};
    }
    emit(j);
  } else {
    std::cout << "verdict: " << label << "\nnecessary conditions:\n"
              << "  index <= 2:          " << (nec.index_ok ? "ok" : "FAIL")
              << " (index " << nec.index << ")\n"
              << "  spectrum:            " << (nec.spectrum_ok ? "ok" : "FAIL")
              << "\n"
              << "  A ker(E) in ran(E):  " << (nec.range_ok ? "ok" : "FAIL")
              << "\n"
              << "  feedthrough at 0:    "
              << (nec.feedthrough_applicable
                      ? (nec.feedthrough_ok ? "ok" : "FAIL")
                      : "n/a")
              << "\nsamples evaluated: " << verdict.samples_evaluated
              << "\nworst margin: " << verdict.worst_margin << "\n";
    if (verdict.status == phr::PrStatus::not_pr) {
      std::cout << "witness point: " << verdict.witness_point
                << " violation: " << verdict.witness_violation << "\n";
    }
  }
  return code;
}

int run_realize(const std::string& path, const std::string& out_path,
                std::optional<double> alpha, std::optional<double> beta,
                const std::string& method, const GlobalFlags& flags) {
  const phr::SystemFile file = phr::load_system_file(path);
  const phr::ToleranceConfig cfg = effective_config(flags, file);

  phr::RealizeOptions opts;
  opts.alpha = alpha;
  opts.beta = beta;
  const phr::RealizationResult result =
      method == "infinity-split" ? phr::realize_infinity_split(file.system, cfg)
                                 : phr::realize_ph(file.system, cfg, opts);

  const nlohmann::json rj = phr::realization_to_json(result);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      throw phr::InvalidInputError("cannot open output file: " + out_path);
    }
    out << rj.dump(2) << "\n";
  }

  if (flags.json) {
    auto j = report_base(cfg, "realize", file.name);
    j["realization"] = rj;
    emit(j);
  } else {
    print_header(cfg, file.name);
    std::cout << "path: " << result.provenance.path << "\n";
    if (result.provenance.W.size() > 0) {
      std::cout << "W:\n" << format_matrix(result.provenance.W) << "\n";
    }
    std::cout << "alpha: " << result.provenance.alpha
              << "\nbeta: " << result.provenance.beta << "\nstaircase blocks: [";
    for (std::size_t i = 0; i < result.provenance.staircase_blocks.size();
         ++i) {
      if (i) std::cout << ", ";
      std::cout << result.provenance.staircase_blocks[i];
    }
    std::cout << "]\ntransfer function max relative error: "
              << result.provenance.tf_max_rel_err
              << "\ncertificate lmi_margin: " << result.certificate.lmi_margin
              << "\ncertificate etq_psd_margin: "
              << result.certificate.etq_psd_margin << "\n";
    for (const auto& note : result.provenance.notes) {
      std::cout << "note: " << note << "\n";
    }
    if (!out_path.empty()) std::cout << "wrote: " << out_path << "\n";
  }
  return kExitOk;
}

int run_verify(const std::string& original_path,
               const std::string& realization_path, const GlobalFlags& flags) {
  const phr::SystemFile file = phr::load_system_file(original_path);
  const phr::ToleranceConfig cfg = effective_config(flags, file);
  const phr::RealizationFile real = phr::load_realization_file(realization_path);

  if (file.system.m() != real.system.m()) {
    throw phr::InvalidInputError(
        "verify: original and realization have different port dimension");
  }

  struct Check {
    std::string name;
    bool passed;
    double residual;
  };
  std::vector<Check> checks;

  const auto tf = phr::tf_equivalent(file.system, real.system, cfg);
  checks.push_back({"transfer-function-match", tf.equivalent, tf.max_rel_err});

  const auto validation = phr::validate_ph(real.ph, cfg);
  for (const auto& item : validation.checks) {
    checks.push_back({"ph-structure: " + item.name, item.passed, item.residual});
  }

  const phr::DescriptorSystem reassembled = real.ph.reassemble();
  const auto reassembly = phr::tf_equivalent(real.system, reassembled, cfg);
  checks.push_back(
      {"ph-reassembly-match", reassembly.equivalent, reassembly.max_rel_err});

  const auto cert = phr::verify_pr_certificate(real.system, real.Q, real.W, cfg);
  checks.push_back({"kyp-certificate", cert.valid,
                    std::max(cert.lmi_margin, cert.etq_sym_residual)});

  bool all = true;
  for (const auto& c : checks) all = all && c.passed;

  if (flags.json) {
    auto j = report_base(cfg, "verify", file.name);
    auto& cj = j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) {
      cj.push_back(
          {{"name", c.name}, {"passed", c.passed}, {"residual", c.residual}});
    }
    j["all_passed"] = all;
    emit(j);
  } else {
    print_header(cfg, file.name);
    for (const auto& c : checks) {
      std::cout << (c.passed ? "pass  " : "FAIL  ") << c.name
                << "  (residual " << c.residual << ")\n";
    }
    std::cout << (all ? "all checks passed" : "verification failed") << "\n";
  }
  return all ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive-real analysis and port-Hamiltonian realization of "
               "descriptor systems"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_flag("--json", flags.json, "Emit machine-readable JSON reports");
  app.add_option("--seed", flags.seed, "Seed for randomized internals");
  app.add_option("--tol-rank", flags.tol_rank, "Relative rank tolerance");
  app.add_option("--tol-psd", flags.tol_psd, "Semidefiniteness tolerance");
  app.add_option("--tol-residual", flags.tol_residual, "Residual tolerance");
  app.add_option("--tf-rtol", flags.tf_rtol,
                 "Transfer-function comparison tolerance");
  app.add_option("--samples", flags.samples, "Sample count for checks");

  std::string analyze_path;
  auto* analyze = app.add_subcommand(
      "analyze", "Pencil regularity, spectrum, index and staircase summary");
  analyze->add_option("file", analyze_path, "System JSON file")->required();

  std::string checkpr_path, certificate_path;
  auto* checkpr = app.add_subcommand(
      "check-pr", "Positive-realness screening or certificate verification");
  checkpr->add_option("file", checkpr_path, "System JSON file")->required();
  checkpr->add_option("--certificate", certificate_path,
                      "Certificate JSON file with Q and optional W");

  std::string realize_path, out_path, method = "shift";
  std::optional<double> alpha, beta;
  auto* realize = app.add_subcommand(
      "realize", "Construct a port-Hamiltonian realization with certificate");
  realize->add_option("file", realize_path, "System JSON file")->required();
  realize->add_option("--out", out_path, "Write the realization JSON here");
  realize->add_option("--alpha", alpha, "Feedthrough shift parameter alpha");
  realize->add_option("--beta", beta, "Feedthrough shift parameter beta");
  realize->add_option("--method", method, "Realization path")
      ->check(CLI::IsMember({"shift", "infinity-split"}));

  std::string verify_original, verify_realization;
  auto* verify = app.add_subcommand(
      "verify", "Re-check a stored realization against its original system");
  verify->add_option("original", verify_original, "Original system JSON file")
      ->required();
  verify->add_option("realization", verify_realization,
                     "Realization JSON file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*analyze) return run_analyze(analyze_path, flags);
    if (*checkpr) return run_check_pr(checkpr_path, certificate_path, flags);
    if (*realize) {
      return run_realize(realize_path, out_path, alpha, beta, method, flags);
    }
    if (*verify) return run_verify(verify_original, verify_realization, flags);
  } catch (const phr::InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const phr::PencilSingularError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIrregular;
  } catch (const phr::NotPositiveRealError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotPr;
  } catch (const phr::NotCompletelyControllableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotPr;
  } catch (const phr::SingularCertificateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerification;
  } catch (const phr::NotACertificateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerification;
  } catch (const phr::InconclusiveError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUnknown;
  } catch (const phr::StructureError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const phr::PreconditionViolationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const phr::InternalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
