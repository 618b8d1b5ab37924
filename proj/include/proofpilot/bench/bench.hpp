#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "proofpilot/engine/engine.hpp"

namespace proofpilot::bench {

// One benchmark module: a file with a single unproved theorem. All metadata
// is auto-extracted from the file itself.
struct BenchmarkRecord {
    std::string path;
    std::string theorem_name;
    std::string statement;
    std::string context_summary;
    int insertion_line = 0;  // where the proof belongs: end of the theorem's span
    tla::TlaModule module;
};

struct LoadReport {
    std::vector<BenchmarkRecord> records;
    std::vector<std::string> problems;  // files that were excluded, with reasons
};

// Loads every .tla file under dir (sorted by name). Files with zero or more
// than one unproved theorem are reported, not silently skipped.
inline LoadReport load_benchmark(const std::string& dir) {
    LoadReport report;
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
        if (entry.is_regular_file() && entry.path().extension() == ".tla")
            files.push_back(entry.path());
    if (ec) {
        report.problems.push_back("cannot read directory " + dir + ": " + ec.message());
        return report;
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) report.problems.push_back("no .tla files in " + dir);

    for (const auto& file : files) {
        std::ifstream in(file);
        std::stringstream buffer;
        buffer << in.rdbuf();
        try {
            tla::TlaModule m = tla::parse_module(buffer.str());
            auto unproved = tla::unproved_theorems(m);
            if (unproved.empty()) {
                report.problems.push_back(file.string() + ": no unproved theorem");
                continue;
            }
            if (unproved.size() > 1) {
                report.problems.push_back(file.string() + ": " +
                                          std::to_string(unproved.size()) +
                                          " unproved theorems, expected exactly one");
                continue;
            }
            const tla::Theorem* goal = unproved.front();
            if (!goal->name) {
                report.problems.push_back(file.string() + ": the unproved theorem has no name");
                continue;
            }
            BenchmarkRecord rec;
            rec.path = file.string();
            rec.theorem_name = *goal->name;
            rec.statement = tla::render_claim(goal->statement);
            rec.insertion_line = goal->line_end;
            int defs = 0, facts = 0;
            for (const auto& u : m.units) {
                defs += std::holds_alternative<tla::Definition>(u);
                if (const auto* t = std::get_if<tla::Theorem>(&u)) facts += (t->proof != std::nullopt);
            }
            rec.context_summary = "extends " +
                                  (m.extends.empty() ? std::string("nothing")
                                                     : support::join(m.extends, ", ")) +
                                  "; " + std::to_string(defs) + " definitions, " +
                                  std::to_string(facts) + " facts";
            rec.module = std::move(m);
            report.records.push_back(std::move(rec));
        } catch (const tla::SyntaxError& e) {
            report.problems.push_back(file.string() + ": " + e.what());
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Suite runner
// ---------------------------------------------------------------------------

enum class Method { Obvious, Sapg, Dlpg, Lmgpa };

inline const char* method_label(Method m) {
    switch (m) {
        case Method::Obvious:
            return "OBVIOUS";
        case Method::Sapg:
            return "SAPG";
        case Method::Dlpg:
            return "DLPG";
        case Method::Lmgpa:
            return "LMGPA";
    }
    return "?";
}

inline Method method_from_name(const std::string& name) {
    std::string lower;
    for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "obvious") return Method::Obvious;
    if (lower == "sapg") return Method::Sapg;
    if (lower == "dlpg") return Method::Dlpg;
    if (lower == "lmgpa") return Method::Lmgpa;
    throw std::invalid_argument("unknown method '" + name +
                                "' (expected obvious|sapg|dlpg|lmgpa)");
}

struct TheoremOutcome {
    std::string theorem;
    bool proved = false;
    long queries = 0;
    double seconds = 0;
    int syn_valid = 0;
    int syn_total = 0;
    std::string reason;  // empty when proved
};

struct MethodMetrics {
    Method method = Method::Obvious;
    int record_count = 0;
    int proved_count = 0;
    long query_total = 0;
    double wall_seconds = 0;
    int syn_valid = 0;
    int syn_total = 0;
    std::vector<TheoremOutcome> outcomes;

    double proved_fraction() const {
        return record_count == 0 ? 0.0 : static_cast<double>(proved_count) / record_count;
    }
    bool uses_llm() const { return method == Method::Dlpg || method == Method::Lmgpa; }
};

struct SuiteMetrics {
    std::vector<MethodMetrics> methods;

    const MethodMetrics* find(Method m) const {
        for (const auto& mm : methods)
            if (mm.method == m) return &mm;
        return nullptr;
    }
};

// Per-record dependencies are created fresh through these factories so
// records stay isolated (and parallelizable). A null llm_factory is fine for
// the symbolic methods.
struct RunConfig {
    engine::Budget budget;
    prover::ProverConfig prover_cfg;
    std::function<std::unique_ptr<prover::ProverClient>()> prover_factory;
    std::function<std::unique_ptr<llm::ChatClient>(llm::QueryLog&, support::Clock&)> llm_factory;
    std::function<std::unique_ptr<support::Clock>()> clock_factory;  // null: shared real clock
    int jobs = 1;
    bool minimize_context = false;
    bool falsify_subclaims = false;
    // QueryLogs of all records, in record order, for determinism checks
    std::shared_ptr<std::vector<nlohmann::json>> query_logs;
};

namespace detail {

inline TheoremOutcome run_one(const BenchmarkRecord& rec, Method method, const RunConfig& cfg,
                              nlohmann::json* query_log_out) {
    TheoremOutcome outcome;
    outcome.theorem = rec.theorem_name;

    std::unique_ptr<support::Clock> owned_clock =
        cfg.clock_factory ? cfg.clock_factory() : nullptr;
    support::Clock& clock = owned_clock ? *owned_clock : support::default_clock();
    double t0 = clock.now_seconds();

    llm::QueryLog log;
    std::unique_ptr<prover::ProverClient> prover_client;
    std::unique_ptr<llm::ChatClient> chat;

    try {
        prover_client = cfg.prover_factory();
        if (cfg.llm_factory) chat = cfg.llm_factory(log, clock);

        engine::Deps deps;
        deps.prover = prover_client.get();
        deps.prover_cfg = cfg.prover_cfg;
        deps.chat = chat.get();
        deps.log = &log;
        deps.clock = &clock;
        deps.minimize_context = cfg.minimize_context;
        deps.falsify_subclaims = cfg.falsify_subclaims;

        switch (method) {
            case Method::Obvious: {
                auto ob = claims::obligation_for_theorem(rec.module, rec.theorem_name);
                claims::AutoProof obvious;
                auto module = prover::build_verification_module(ob, obvious);
                auto vr = prover_client->verify(module, rec.theorem_name, cfg.prover_cfg);
                outcome.proved = vr.accepted();
                if (!outcome.proved) outcome.reason = support::trim(vr.feedback());
                break;
            }
            case Method::Sapg: {
                auto ob = claims::obligation_for_theorem(rec.module, rec.theorem_name);
                auto plan = sapg::generate_auto_proof(ob);
                auto module = prover::build_verification_module(ob, plan.proof);
                auto vr = prover_client->verify(module, rec.theorem_name, cfg.prover_cfg);
                outcome.proved = vr.accepted();
                if (!outcome.proved) outcome.reason = support::trim(vr.feedback());
                break;
            }
            case Method::Dlpg: {
                auto report = engine::dlpg_prove(rec.module, rec.theorem_name, cfg.budget, deps);
                outcome.proved = report.complete();
                outcome.queries = report.query_count;
                outcome.syn_valid = report.syn_valid;
                outcome.syn_total = report.syn_total;
                if (!outcome.proved) outcome.reason = report.failure_stage;
                break;
            }
            case Method::Lmgpa: {
                auto report = engine::lmgpa_prove(rec.module, rec.theorem_name, cfg.budget, deps);
                outcome.proved = report.complete();
                outcome.queries = report.query_count;
                outcome.syn_valid = report.syn_valid;
                outcome.syn_total = report.syn_total;
                if (!outcome.proved) outcome.reason = report.failure_stage;
                break;
            }
        }
    } catch (const std::exception& e) {
        outcome.proved = false;
        outcome.reason = e.what();
    }
    outcome.seconds = clock.now_seconds() - t0;
    if (query_log_out) *query_log_out = log.to_json();
    return outcome;
}

}  // namespace detail

// Runs every record under the method with fresh budgets and isolated state.
// Individual failures become unproved outcomes; the suite never aborts.
inline MethodMetrics run_suite(const std::vector<BenchmarkRecord>& records, Method method,
                               const RunConfig& cfg) {
    MethodMetrics metrics;
    metrics.method = method;
    metrics.record_count = static_cast<int>(records.size());
    metrics.outcomes.resize(records.size());
    std::vector<nlohmann::json> logs(records.size());

    int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        for (size_t i = 0; i < records.size(); ++i)
            metrics.outcomes[i] = detail::run_one(records[i], method, cfg, &logs[i]);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> workers;
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                while (true) {
                    size_t i = next.fetch_add(1);
                    if (i >= records.size()) break;
                    metrics.outcomes[i] = detail::run_one(records[i], method, cfg, &logs[i]);
                }
            });
        }
        for (auto& t : workers) t.join();
    }

    for (const auto& o : metrics.outcomes) {
        metrics.proved_count += o.proved;
        metrics.query_total += o.queries;
        metrics.wall_seconds += o.seconds;
        metrics.syn_valid += o.syn_valid;
        metrics.syn_total += o.syn_total;
    }
    if (cfg.query_logs)
        for (auto& l : logs) cfg.query_logs->push_back(std::move(l));
    return metrics;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class ReportFormat { Table, Json };

namespace detail {

inline std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", fraction * 100.0);
    return buf;
}

inline std::string humanize_seconds(double seconds) {
    long total = static_cast<long>(seconds);
    if (total < 60) return std::to_string(total) + "s";
    long minutes = total / 60;
    long hours = minutes / 60;
    minutes %= 60;
    if (hours > 0) return std::to_string(hours) + "h " + std::to_string(minutes) + "m";
    return std::to_string(minutes) + "m";
}

inline std::string pad_left(const std::string& s, size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string& s, size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

struct UnionStats {
    int proved = 0;
    int records = 0;
    double fraction() const { return records == 0 ? 0.0 : double(proved) / records; }
};

// Per-theorem outcome union over the given methods; never re-runs anything.
inline UnionStats outcome_union(const SuiteMetrics& metrics, const std::vector<Method>& methods) {
    std::map<std::string, bool> proved_by_any;
    for (Method m : methods) {
        const MethodMetrics* mm = metrics.find(m);
        if (!mm) continue;
        for (const auto& o : mm->outcomes) {
            auto [it, inserted] = proved_by_any.emplace(o.theorem, o.proved);
            if (!inserted) it->second = it->second || o.proved;
        }
    }
    UnionStats stats;
    stats.records = static_cast<int>(proved_by_any.size());
    for (const auto& [_, proved] : proved_by_any) stats.proved += proved;
    return stats;
}

}  // namespace detail

// Renders metrics with the evaluation tables' column set: Proved, #Q, Time
// per method, and the per-theorem union columns when several methods ran.
inline std::string emit_report(const SuiteMetrics& metrics, ReportFormat format) {
    const std::vector<Method> order = {Method::Obvious, Method::Sapg, Method::Dlpg, Method::Lmgpa};

    if (format == ReportFormat::Table) {
        std::string out;
        out += detail::pad_right("Method", 9) + detail::pad_left("Proved", 8) +
               detail::pad_left("#Q", 7) + detail::pad_left("Time", 10) + "\n";
        for (Method m : order) {
            const MethodMetrics* mm = metrics.find(m);
            if (!mm) continue;
            out += detail::pad_right(method_label(m), 9);
            out += detail::pad_left(detail::percent(mm->proved_fraction()), 8);
            out += detail::pad_left(mm->uses_llm() ? std::to_string(mm->query_total) : "none", 7);
            out += detail::pad_left(detail::humanize_seconds(mm->wall_seconds), 10);
            out += "\n";
        }

        bool have_lmgpa = metrics.find(Method::Lmgpa) != nullptr;
        bool have_sapg_dlpg =
            metrics.find(Method::Sapg) != nullptr && metrics.find(Method::Dlpg) != nullptr;
        if (have_lmgpa && have_sapg_dlpg) {
            auto sapg_dlpg = detail::outcome_union(metrics, {Method::Sapg, Method::Dlpg});
            auto lmgpa = detail::outcome_union(metrics, {Method::Lmgpa});
            auto total =
                detail::outcome_union(metrics, {Method::Sapg, Method::Dlpg, Method::Lmgpa});
            out += "\n";
            out += detail::pad_right("SAPG+DLPG", 11) + detail::pad_right("LMGPA", 8) +
                   "Total Combined\n";
            out += detail::pad_right(detail::percent(sapg_dlpg.fraction()), 11) +
                   detail::pad_right(detail::percent(lmgpa.fraction()), 8) +
                   detail::percent(total.fraction()) + "\n";
        }

        int syn_total = 0;
        for (const auto& mm : metrics.methods) syn_total += mm.syn_total;
        if (syn_total > 0) {
            out += "\n";
            out += detail::pad_right("Method", 9) + detail::pad_left("Syn. Valid/#Queries", 21) +
                   detail::pad_left("Percentage", 12) + "\n";
            for (Method m : order) {
                const MethodMetrics* mm = metrics.find(m);
                if (!mm || mm->syn_total == 0) continue;
                out += detail::pad_right(method_label(m), 9);
                out += detail::pad_left(
                    std::to_string(mm->syn_valid) + "/" + std::to_string(mm->syn_total), 21);
                out += detail::pad_left(
                    detail::percent(double(mm->syn_valid) / double(mm->syn_total)), 12);
                out += "\n";
            }
        }
        return out;
    }

    nlohmann::json j;
    j["methods"] = nlohmann::json::array();
    for (Method m : order) {
        const MethodMetrics* mm = metrics.find(m);
        if (!mm) continue;
        nlohmann::json jm;
        jm["method"] = method_label(m);
        jm["records"] = mm->record_count;
        jm["proved"] = mm->proved_count;
        jm["proved_percent"] = detail::percent(mm->proved_fraction());
        jm["queries"] = mm->uses_llm() ? nlohmann::json(mm->query_total) : nlohmann::json("none");
        jm["time_seconds"] = mm->wall_seconds;
        jm["time"] = detail::humanize_seconds(mm->wall_seconds);
        if (mm->syn_total > 0)
            jm["syntactic_validity"] = {{"valid", mm->syn_valid},
                                        {"total", mm->syn_total},
                                        {"percent", detail::percent(double(mm->syn_valid) /
                                                                    double(mm->syn_total))}};
        nlohmann::json outcomes = nlohmann::json::array();
        for (const auto& o : mm->outcomes) {
            outcomes.push_back({{"theorem", o.theorem},
                                {"proved", o.proved},
                                {"queries", o.queries},
                                {"seconds", o.seconds},
                                {"reason", o.reason}});
        }
        jm["outcomes"] = std::move(outcomes);
        j["methods"].push_back(std::move(jm));
    }
    auto add_union = [&](const char* key, const std::vector<Method>& methods) {
        auto u = detail::outcome_union(metrics, methods);
        if (u.records == 0) return;
        j["combined"][key] = {{"proved", u.proved},
                              {"records", u.records},
                              {"percent", detail::percent(u.fraction())}};
    };
    if (metrics.find(Method::Sapg) && metrics.find(Method::Dlpg))
        add_union("sapg_dlpg", {Method::Sapg, Method::Dlpg});
    if (metrics.find(Method::Lmgpa)) add_union("lmgpa", {Method::Lmgpa});
    add_union("total_combined", {Method::Sapg, Method::Dlpg, Method::Lmgpa});
    return j.dump(2) + "\n";
}

}  // namespace proofpilot::bench
