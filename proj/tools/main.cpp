// proofpilot: automated TLA+ proof generation driven by claim decomposition,
// with symbolic auto proofs and a benchmark harness.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "proofpilot/bench/bench.hpp"
#include "proofpilot/engine/engine.hpp"
#include "proofpilot/llm/http_client.hpp"
#include "proofpilot/support/config_file.hpp"

namespace pp = proofpilot;

namespace {

struct Options {
    std::string config_path;
    std::string method = "lmgpa";
    std::string theorem;
    std::string model;
    std::string provider;
    std::string base_url;
    std::string out_path;
    std::string report_path;
    std::string mock_llm;
    std::string mock_prover;
    std::string tlapm_path;
    int jobs = 1;
    int max_depth = -1;
    int decomp_attempts = -1;
    int dlpg_retries = -1;
    bool minimize_context = false;
    bool falsify = false;
};

struct Settings {
    pp::prover::ProverConfig prover_cfg;
    pp::llm::LlmConfig llm_cfg;
    pp::engine::Budget budget;
    bool minimize_context = false;
    bool falsify = false;
};

// precedence: flag > environment (tlapm path, api key) > config file > default
Settings assemble_settings(const Options& opt) {
    Settings s;
    s.prover_cfg = pp::prover::default_prover_config();

    if (!opt.config_path.empty()) {
        auto cfg = pp::support::ConfigFile::load(opt.config_path);
        if (cfg.has("prover.tlapm_path") && std::getenv("PROOFPILOT_TLAPM") == nullptr)
            s.prover_cfg.tlapm_path = cfg.get("prover.tlapm_path");
        s.prover_cfg.workers = cfg.get_int("prover.workers", s.prover_cfg.workers);
        s.prover_cfg.grace_seconds = cfg.get_int("prover.grace_seconds", s.prover_cfg.grace_seconds);
        if (cfg.has("prover.scratch_dir")) s.prover_cfg.scratch_dir = cfg.get("prover.scratch_dir");
        if (cfg.has("prover.ladder")) {
            s.prover_cfg.ladder.clear();
            for (const auto& step : pp::support::split(cfg.get("prover.ladder"), ',')) {
                auto parts = pp::support::split(pp::support::trim(step), ':');
                if (parts.size() != 2)
                    throw std::runtime_error("prover.ladder entries look like backend:seconds");
                s.prover_cfg.ladder.push_back({parts[0], std::stoi(parts[1])});
            }
        }
        s.llm_cfg.provider = cfg.get("llm.provider", s.llm_cfg.provider);
        s.llm_cfg.model = cfg.get("llm.model", s.llm_cfg.model);
        s.llm_cfg.temperature = cfg.get_double("llm.temperature", s.llm_cfg.temperature);
        s.llm_cfg.max_retries_decomp =
            cfg.get_int("llm.max_retries_decomp", s.llm_cfg.max_retries_decomp);
        s.llm_cfg.max_retries_dlpg = cfg.get_int("llm.max_retries_dlpg", s.llm_cfg.max_retries_dlpg);
        s.llm_cfg.base_url = cfg.get("llm.base_url", s.llm_cfg.base_url);
        s.llm_cfg.mock_script = cfg.get("llm.mock_script", s.llm_cfg.mock_script);
        s.budget.max_decomp_attempts =
            cfg.get_int("budget.max_decomp_attempts", s.budget.max_decomp_attempts);
        s.budget.max_dlpg_retries = cfg.get_int("budget.max_dlpg_retries", s.budget.max_dlpg_retries);
        s.budget.max_depth = cfg.get_int("budget.max_depth", s.budget.max_depth);
        s.minimize_context = cfg.get_bool("engine.minimize_context", false);
        s.falsify = cfg.get_bool("engine.falsify_subclaims", false);
    }

    if (!opt.tlapm_path.empty()) s.prover_cfg.tlapm_path = opt.tlapm_path;
    if (!opt.model.empty()) s.llm_cfg.model = opt.model;
    if (!opt.provider.empty()) s.llm_cfg.provider = opt.provider;
    if (!opt.base_url.empty()) s.llm_cfg.base_url = opt.base_url;
    if (!opt.mock_llm.empty()) {
        s.llm_cfg.provider = "mock";
        s.llm_cfg.mock_script = opt.mock_llm;
    }
    if (opt.max_depth > 0) s.budget.max_depth = opt.max_depth;
    if (opt.decomp_attempts > 0) s.budget.max_decomp_attempts = opt.decomp_attempts;
    if (opt.dlpg_retries > 0) s.budget.max_dlpg_retries = opt.dlpg_retries;
    s.budget.max_decomp_attempts =
        std::min(s.budget.max_decomp_attempts, s.llm_cfg.max_retries_decomp);
    s.budget.max_decomp_attempts = std::max(1, s.budget.max_decomp_attempts);
    s.budget.max_dlpg_retries = std::min(s.budget.max_dlpg_retries, s.llm_cfg.max_retries_dlpg);
    s.budget.max_dlpg_retries = std::max(1, s.budget.max_dlpg_retries);
    s.minimize_context |= opt.minimize_context;
    s.falsify |= opt.falsify;
    return s;
}

pp::tla::TlaModule load_module(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return pp::tla::parse_module(buffer.str());
}

std::unique_ptr<pp::prover::ProverClient> make_prover(const Options& opt) {
    if (!opt.mock_prover.empty())
        return std::make_unique<pp::prover::MockProver>(
            pp::prover::MockProver::from_file(opt.mock_prover));
    return std::make_unique<pp::prover::TlapmProver>();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

int cmd_prove(const Options& opt, const std::string& file) {
    Settings s = assemble_settings(opt);
    pp::tla::TlaModule module = load_module(file);

    std::string theorem = opt.theorem;
    if (theorem.empty()) {
        auto unproved = pp::tla::unproved_theorems(module);
        if (unproved.size() != 1 || !unproved.front()->name)
            throw std::runtime_error(
                "pass --theorem: the module does not have exactly one named unproved theorem");
        theorem = *unproved.front()->name;
    }

    auto prover_client = make_prover(opt);
    pp::llm::QueryLog log;
    pp::support::RealClock clock;
    std::unique_ptr<pp::llm::ChatClient> chat;

    pp::engine::Deps deps;
    deps.prover = prover_client.get();
    deps.prover_cfg = s.prover_cfg;
    deps.log = &log;
    deps.clock = &clock;
    deps.minimize_context = s.minimize_context;
    deps.falsify_subclaims = s.falsify;

    pp::bench::Method method = pp::bench::method_from_name(opt.method);
    if (method == pp::bench::Method::Dlpg || method == pp::bench::Method::Lmgpa) {
        chat = pp::llm::make_chat_client(s.llm_cfg, &log, &clock);
        deps.chat = chat.get();
    }

    pp::engine::RunReport report;
    switch (method) {
        case pp::bench::Method::Obvious:
        case pp::bench::Method::Sapg: {
            auto ob = pp::claims::obligation_for_theorem(module, theorem);
            pp::claims::AutoProof proof;  // OBVIOUS
            if (method == pp::bench::Method::Sapg) proof = pp::sapg::generate_auto_proof(ob).proof;
            auto vm = pp::prover::build_verification_module(ob, proof);
            auto vr = prover_client->verify(vm, theorem, s.prover_cfg);
            pp::claims::ProofNode node;
            node.name = theorem;
            node.claim = ob.goal;
            node.form = pp::claims::ProofNode::Form::Auto;
            node.auto_proof = proof;
            node.auto_accepted = vr.accepted();
            node.status = pp::claims::claim_status(node);
            if (vr.accepted()) {
                report.outcome = pp::engine::RunReport::Outcome::CompleteProof;
                report.module_text = pp::tla::render_module(pp::engine::assemble_proof(node, module));
            } else {
                report.failure_stage = pp::support::trim(vr.feedback());
            }
            report.tree = std::move(node);
            break;
        }
        case pp::bench::Method::Dlpg:
            report = pp::engine::dlpg_prove(module, theorem, s.budget, deps);
            break;
        case pp::bench::Method::Lmgpa:
            report = pp::engine::lmgpa_prove(module, theorem, s.budget, deps);
            break;
    }

    if (report.complete()) {
        std::cout << "proved " << theorem << " (" << report.query_count << " queries)\n";
        if (!opt.out_path.empty()) {
            write_file(opt.out_path, report.module_text);
            std::cout << "wrote " << opt.out_path << "\n";
        } else {
            std::cout << report.module_text;
        }
    } else {
        std::cout << "unproved " << theorem << ": " << report.failure_stage << "\n";
    }
    if (!opt.report_path.empty()) write_file(opt.report_path, report.to_json().dump(2) + "\n");
    return report.complete() ? 0 : 1;
}

int cmd_bench(const Options& opt, const std::string& dir) {
    Settings s = assemble_settings(opt);
    pp::bench::LoadReport load = pp::bench::load_benchmark(dir);
    for (const auto& p : load.problems) std::cerr << "warning: " << p << "\n";
    if (load.records.empty()) {
        std::cerr << "no usable benchmark records in " << dir << "\n";
        return 1;
    }

    pp::bench::RunConfig run_cfg;
    run_cfg.budget = s.budget;
    run_cfg.prover_cfg = s.prover_cfg;
    run_cfg.jobs = opt.jobs;
    run_cfg.minimize_context = s.minimize_context;
    run_cfg.falsify_subclaims = s.falsify;
    run_cfg.prover_factory = [&] { return make_prover(opt); };

    pp::bench::SuiteMetrics metrics;
    for (const auto& name : pp::support::split(opt.method, ',')) {
        pp::bench::Method method = pp::bench::method_from_name(pp::support::trim(name));
        if (method == pp::bench::Method::Dlpg || method == pp::bench::Method::Lmgpa) {
            run_cfg.llm_factory = [&](pp::llm::QueryLog& log, pp::support::Clock& clock) {
                return pp::llm::make_chat_client(s.llm_cfg, &log, &clock);
            };
        } else {
            run_cfg.llm_factory = nullptr;
        }
        metrics.methods.push_back(pp::bench::run_suite(load.records, method, run_cfg));
    }

    std::string table = pp::bench::emit_report(metrics, pp::bench::ReportFormat::Table);
    std::cout << table;
    if (!opt.report_path.empty()) {
        write_file(opt.report_path, pp::bench::emit_report(metrics, pp::bench::ReportFormat::Json));
        write_file(opt.report_path + ".txt", table);
        std::cout << "wrote " << opt.report_path << " and " << opt.report_path << ".txt\n";
    }
    return 0;
}

int cmd_check(const Options& opt, const std::string& file) {
    Settings s = assemble_settings(opt);
    pp::tla::TlaModule module = load_module(file);
    auto prover_client = make_prover(opt);
    auto vr = prover_client->verify(module, "", s.prover_cfg);
    if (vr.accepted()) {
        std::cout << "verified: every obligation in " << module.name << " is proved\n";
        return 0;
    }
    std::cout << "verification failed (" << pp::prover::verdict_name(vr.verdict) << ")\n"
              << vr.feedback();
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"automated TLA+ proof generation"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("--config", opt.config_path, "configuration file (key = value sections)");

    std::string prove_file, bench_dir, check_file;

    CLI::App* prove = app.add_subcommand("prove", "prove one theorem of a module");
    prove->add_option("file", prove_file, "TLA+ module file")->required();
    prove->add_option("--method", opt.method, "lmgpa|dlpg|sapg|obvious (default lmgpa)");
    prove->add_option("--theorem", opt.theorem, "goal theorem (default: the unproved one)");
    prove->add_option("--model", opt.model, "model identifier");
    prove->add_option("--provider", opt.provider, "llm provider profile");
    prove->add_option("--base-url", opt.base_url, "llm endpoint base URL");
    prove->add_option("--out", opt.out_path, "write the proved module here");
    prove->add_option("--report", opt.report_path, "write the run report (JSON) here");
    prove->add_option("--mock-llm", opt.mock_llm, "scripted LLM responses (JSON)");
    prove->add_option("--mock-prover", opt.mock_prover, "scripted prover verdicts (JSON)");
    prove->add_option("--tlapm", opt.tlapm_path, "tlapm executable");
    prove->add_option("--max-depth", opt.max_depth, "recursion depth cap");
    prove->add_option("--decomp-attempts", opt.decomp_attempts, "decomposition attempts per claim");
    prove->add_option("--dlpg-retries", opt.dlpg_retries, "direct-generation retries");
    prove->add_flag("--minimize-context", opt.minimize_context, "filter context per recursive call");
    prove->add_flag("--falsify", opt.falsify, "try to falsify sub-claims before verification");

    CLI::App* bench = app.add_subcommand("bench", "run a benchmark suite");
    bench->add_option("dir", bench_dir, "directory of .tla benchmark modules")->required();
    bench->add_option("--method", opt.method, "comma-separated: obvious,sapg,dlpg,lmgpa")
        ->required();
    bench->add_option("--report", opt.report_path, "write JSON report here (+ .txt table)");
    bench->add_option("--jobs", opt.jobs, "concurrent records");
    bench->add_option("--model", opt.model, "model identifier");
    bench->add_option("--provider", opt.provider, "llm provider profile");
    bench->add_option("--base-url", opt.base_url, "llm endpoint base URL");
    bench->add_option("--mock-llm", opt.mock_llm, "scripted LLM responses (JSON)");
    bench->add_option("--mock-prover", opt.mock_prover, "scripted prover verdicts (JSON)");
    bench->add_option("--tlapm", opt.tlapm_path, "tlapm executable");
    bench->add_flag("--minimize-context", opt.minimize_context, "filter context per recursive call");
    bench->add_flag("--falsify", opt.falsify, "try to falsify sub-claims before verification");

    CLI::App* check = app.add_subcommand("check", "re-verify an assembled proof module");
    check->add_option("file", check_file, "TLA+ module file")->required();
    check->add_option("--mock-prover", opt.mock_prover, "scripted prover verdicts (JSON)");
    check->add_option("--tlapm", opt.tlapm_path, "tlapm executable");

    CLI11_PARSE(app, argc, argv);

    try {
        if (prove->parsed()) return cmd_prove(opt, prove_file);
        if (bench->parsed()) return cmd_bench(opt, bench_dir);
        if (check->parsed()) return cmd_check(opt, check_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
