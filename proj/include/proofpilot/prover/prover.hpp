#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <unistd.h>
#include <vector>

#include "proofpilot/claims/claims.hpp"
#include "proofpilot/prover/subprocess.hpp"
#include "proofpilot/sapg/sapg.hpp"
#include "proofpilot/tla/printer.hpp"

namespace proofpilot::prover {

struct BackendStep {
    std::string backend;
    int timeout_seconds = 0;
};

struct ProverConfig {
    std::string tlapm_path = "tlapm";
    int workers = 16;
    // default ladder: Z3 (5s), Zenon (10s), Isabelle (30s) -> 45s per obligation
    std::vector<BackendStep> ladder = {{"z3", 5}, {"zenon", 10}, {"isabelle", 30}};
    std::string scratch_dir;
    int grace_seconds = 15;

    int ladder_total_seconds() const {
        int total = 0;
        for (const auto& s : ladder) total += s.timeout_seconds;
        return total;
    }
};

// PROOFPILOT_TLAPM overrides the tlapm executable path.
inline ProverConfig default_prover_config() {
    ProverConfig cfg;
    if (const char* env = std::getenv("PROOFPILOT_TLAPM"); env && *env) cfg.tlapm_path = env;
    cfg.scratch_dir = (std::filesystem::temp_directory_path() / "proofpilot-scratch").string();
    return cfg;
}

enum class Verdict { Accepted, Rejected, Timeout, ToolError };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Accepted:
            return "accepted";
        case Verdict::Rejected:
            return "rejected";
        case Verdict::Timeout:
            return "timeout";
        case Verdict::ToolError:
            return "tool_error";
    }
    return "tool_error";
}

struct ObligationReport {
    std::string location;
    std::string status;   // proved | trivial | failed | interrupted | ...
    std::string backend;  // backend that settled it, if reported
    std::string obligation_text;

    bool settled_ok() const { return status == "proved" || status == "trivial"; }
};

struct VerificationResult {
    Verdict verdict = Verdict::ToolError;
    std::vector<ObligationReport> obligations;
    std::string raw_output;
    std::string tool_message;  // stderr or error-block text

    bool accepted() const { return verdict == Verdict::Accepted; }

    // Diagnostics for the feedback loop: empty exactly when accepted.
    std::string feedback() const {
        if (verdict == Verdict::Accepted) return "";
        std::string out;
        if (verdict == Verdict::Timeout)
            out += "verification timed out before all obligations were settled\n";
        for (const auto& ob : obligations) {
            if (ob.settled_ok()) continue;
            out += "obligation at " + (ob.location.empty() ? "?" : ob.location) + ": " + ob.status;
            if (!ob.backend.empty()) out += " (backend " + ob.backend + ")";
            out += "\n";
            if (!ob.obligation_text.empty()) out += ob.obligation_text + "\n";
        }
        if (!tool_message.empty()) out += tool_message + "\n";
        if (out.empty()) out = "the prover rejected the proof without diagnostics\n";
        return out;
    }
};

// ---------------------------------------------------------------------------
// tlapm output parsing (toolbox message protocol)
// ---------------------------------------------------------------------------

namespace detail {

struct ToolboxMessage {
    std::map<std::string, std::string> fields;
};

inline std::vector<ToolboxMessage> parse_toolbox_messages(const std::string& text) {
    std::vector<ToolboxMessage> messages;
    ToolboxMessage current;
    bool in_block = false;
    std::string pending_key;
    for (const auto& line : support::split_lines(text)) {
        if (line == "@!!BEGIN") {
            in_block = true;
            current.fields.clear();
            pending_key.clear();
            continue;
        }
        if (line == "@!!END") {
            if (in_block) messages.push_back(current);
            in_block = false;
            pending_key.clear();
            continue;
        }
        if (!in_block) continue;
        if (support::starts_with(line, "@!!")) {
            size_t colon = line.find(':');
            if (colon == std::string::npos) continue;
            std::string key = line.substr(3, colon - 3);
            std::string value = line.substr(colon + 1);
            current.fields[key] = value;
            pending_key = key;  // multiline values (obl:) continue below
        } else if (!pending_key.empty()) {
            current.fields[pending_key] += "\n" + line;
        }
    }
    return messages;
}

}  // namespace detail

struct TlapmOutput {
    std::vector<ObligationReport> obligations;
    std::vector<std::string> errors;
    bool saw_toolbox_output = false;
};

// Keys on tlapm's per-obligation status blocks; later messages for the same
// obligation id supersede earlier ones. Unknown formats leave the result
// empty, which degrades to ToolError upstream (never silently Accepted).
inline TlapmOutput parse_tlapm_output(const std::string& text) {
    TlapmOutput out;
    std::map<std::string, ObligationReport> by_id;
    std::vector<std::string> id_order;
    for (const auto& msg : detail::parse_toolbox_messages(text)) {
        out.saw_toolbox_output = true;
        auto field = [&](const char* k) {
            auto it = msg.fields.find(k);
            return it == msg.fields.end() ? std::string() : it->second;
        };
        std::string type = field("type");
        if (type == "obligation") {
            std::string id = field("id");
            if (!by_id.count(id)) id_order.push_back(id);
            auto& rep = by_id[id];
            if (!field("loc").empty()) rep.location = field("loc");
            std::string status = field("status");
            if (!status.empty()) rep.status = status;
            if (!field("prover").empty()) rep.backend = field("prover");
            if (!field("obl").empty()) rep.obligation_text = field("obl");
        } else if (type == "error" || type == "warning") {
            std::string msg_text = field("msg");
            if (type == "error") out.errors.push_back(msg_text.empty() ? "tlapm error" : msg_text);
        }
    }
    for (const auto& id : id_order) out.obligations.push_back(by_id[id]);
    return out;
}

// ---------------------------------------------------------------------------
// Verification module synthesis
// ---------------------------------------------------------------------------

namespace detail {

inline tla::TlaModule verification_module_base(const claims::ProofObligation& ob) {
    tla::TlaModule m;
    m.name = ob.goal_name + "_check";
    m.extends = ob.imports;
    bool has_tlaps = false;
    for (const auto& e : m.extends) has_tlaps |= (e == "TLAPS");
    if (!has_tlaps) m.extends.push_back("TLAPS");
    for (const auto& u : ob.context) {
        if (const auto* t = std::get_if<tla::Theorem>(&u)) {
            // context facts are citable but generate no obligations
            tla::Theorem fact = *t;
            fact.proof = tla::omitted_proof();
            m.units.push_back(std::move(fact));
        } else if (std::holds_alternative<tla::Definition>(u)) {
            m.units.push_back(u);
        }
    }
    return m;
}

}  // namespace detail

// Module that checks an auto proof: context, then the goal theorem carrying
// the candidate proof.
inline tla::TlaModule build_verification_module(const claims::ProofObligation& ob,
                                                const claims::AutoProof& proof) {
    tla::TlaModule m = detail::verification_module_base(ob);
    tla::Theorem goal;
    goal.name = ob.goal_name;
    goal.statement = ob.goal;
    goal.proof = claims::to_tla_proof(proof);
    m.units.push_back(std::move(goal));
    return m;
}

// Module that checks a decomposition: every sub-claim enters with proof
// OMITTED, the parent cites them with BY (plus DEF for definitions reachable
// from the claims involved).
inline tla::TlaModule build_verification_module(const claims::ProofObligation& ob,
                                                const std::vector<claims::NormalizedClaim>& subs,
                                                std::vector<std::string>* by_defs_out = nullptr) {
    if (subs.empty()) throw claims::ClaimError(claims::ClaimError::Kind::EmptyDecomposition, "");
    tla::TlaModule m = detail::verification_module_base(ob);
    auto context_names = claims::context_symbol_names(ob);

    std::vector<tla::Theorem> sub_theorems;
    std::vector<std::string> sub_names;
    for (const auto& c : subs) {
        tla::Theorem t = claims::render_assume_prove(c, context_names);
        t.proof = tla::omitted_proof();
        sub_names.push_back(*t.name);
        sub_theorems.push_back(std::move(t));
    }

    std::vector<std::string> defs = sapg::decomposition_defs(ob, sub_theorems);
    for (const auto& c : subs)
        for (const auto& name : claims::def_refs(c)) tla::detail::push_unique(defs, name);
    if (by_defs_out) *by_defs_out = defs;

    for (auto& t : sub_theorems) m.units.push_back(std::move(t));

    tla::Theorem goal;
    goal.name = ob.goal_name;
    goal.statement = ob.goal;
    goal.proof = tla::by_proof(sub_names, defs);
    m.units.push_back(std::move(goal));
    return m;
}

// ---------------------------------------------------------------------------
// Prover clients
// ---------------------------------------------------------------------------

// Blocking per call; concurrent calls use distinct scratch files and
// processes. `target_theorem` empty means: check the whole module.
class ProverClient {
public:
    virtual ~ProverClient() = default;
    virtual VerificationResult verify(const tla::TlaModule& module,
                                      const std::string& target_theorem,
                                      const ProverConfig& cfg) = 0;
};

namespace detail {

// 1-based line span of a theorem in rendered module text.
inline std::pair<int, int> rendered_theorem_span(const std::string& text,
                                                 const std::string& name) {
    auto lines = support::split_lines(text);
    int begin = 0;
    for (size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (begin == 0) {
            if (support::starts_with(line, "THEOREM " + name + " ") ||
                line == "THEOREM " + name ||
                support::starts_with(line, "THEOREM " + name + "=="))
                begin = static_cast<int>(i) + 1;
            continue;
        }
        if (support::starts_with(line, "THEOREM ") || support::starts_with(line, "====") ||
            support::starts_with(line, "LEMMA "))
            return {begin, static_cast<int>(i)};
    }
    if (begin == 0) return {1, static_cast<int>(lines.size())};
    return {begin, static_cast<int>(lines.size())};
}

inline int active_proof_count(const tla::TlaModule& m) {
    int n = 0;
    for (const auto& u : m.units)
        if (const auto* t = std::get_if<tla::Theorem>(&u))
            if (t->proof && t->proof->kind != tla::ProofKind::Omitted) ++n;
    return n == 0 ? 1 : n;
}

}  // namespace detail

// Wraps the external tlapm binary. Scratch modules are uniquely named per
// invocation (run id + counter) so concurrent verifications never collide.
class TlapmProver final : public ProverClient {
public:
    VerificationResult verify(const tla::TlaModule& module, const std::string& target_theorem,
                              const ProverConfig& cfg) override {
        VerificationResult result;
        std::string text = tla::render_module(module);
        result.raw_output = "";

        std::filesystem::path dir = scratch_run_dir(cfg);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) {
            result.verdict = Verdict::ToolError;
            result.tool_message = "cannot create scratch directory " + dir.string();
            return result;
        }
        std::filesystem::path file = dir / (module.name + ".tla");
        {
            std::ofstream out(file);
            out << text;
        }

        std::pair<int, int> span;
        if (target_theorem.empty()) {
            span = {1, static_cast<int>(support::split_lines(text).size())};
        } else {
            span = detail::rendered_theorem_span(text, target_theorem);
        }

        std::vector<std::string> argv = build_tlapm_args(cfg, file.string(), span);
        double ceiling =
            static_cast<double>(cfg.ladder_total_seconds() + cfg.grace_seconds) *
            (target_theorem.empty() ? detail::active_proof_count(module) : 1);

        ProcessResult proc = run_process(argv, ceiling);
        result.raw_output = proc.out;
        if (proc.spawn_failed) {
            result.verdict = Verdict::ToolError;
            result.tool_message = "cannot execute tlapm at '" + cfg.tlapm_path + "'";
            return result;
        }
        if (proc.timed_out) {
            result.verdict = Verdict::Timeout;
            TlapmOutput parsed = parse_tlapm_output(proc.out);
            result.obligations = parsed.obligations;
            result.tool_message = "wall-clock ceiling exceeded";
            return result;
        }

        TlapmOutput parsed = parse_tlapm_output(proc.out);
        result.obligations = parsed.obligations;
        if (!parsed.errors.empty()) {
            result.verdict = Verdict::ToolError;
            result.tool_message = support::join(parsed.errors, "\n");
            if (!proc.err.empty()) result.tool_message += "\n" + proc.err;
            return result;
        }
        if (!parsed.saw_toolbox_output || parsed.obligations.empty()) {
            result.verdict = Verdict::ToolError;
            result.tool_message = "unrecognized tlapm output (exit code " +
                                  std::to_string(proc.exit_code) + ")";
            if (!proc.err.empty()) result.tool_message += "\n" + proc.err;
            return result;
        }
        bool all_ok = true;
        for (const auto& ob : result.obligations) all_ok &= ob.settled_ok();
        result.verdict = all_ok ? Verdict::Accepted : Verdict::Rejected;
        if (result.verdict == Verdict::Rejected && proc.exit_code != 0 && !proc.err.empty())
            result.tool_message = proc.err;
        return result;
    }

    // The flag mapping lives here so it can be adjusted against the installed
    // tlapm version in one place.
    static std::vector<std::string> build_tlapm_args(const ProverConfig& cfg,
                                                     const std::string& module_path,
                                                     std::pair<int, int> span) {
        std::vector<std::string> argv = {cfg.tlapm_path, "--toolbox",
                                         std::to_string(span.first), std::to_string(span.second),
                                         "--threads", std::to_string(cfg.workers)};
        std::vector<std::string> methods;
        for (const auto& step : cfg.ladder)
            methods.push_back(step.backend + std::to_string(step.timeout_seconds));
        if (!methods.empty()) {
            argv.push_back("--method");
            argv.push_back(support::join(methods, ","));
        }
        argv.push_back(module_path);
        return argv;
    }

private:
    std::filesystem::path scratch_run_dir(const ProverConfig& cfg) {
        static std::atomic<uint64_t> counter{0};
        uint64_t n = counter.fetch_add(1);
        std::string run_id = "run-" + std::to_string(::getpid()) + "-" + std::to_string(n);
        std::filesystem::path base =
            cfg.scratch_dir.empty()
                ? std::filesystem::temp_directory_path() / "proofpilot-scratch"
                : std::filesystem::path(cfg.scratch_dir);
        return base / run_id;
    }
};

// Scripted verdict table for tests and offline runs. Entries match on any
// combination of module name, target theorem, and the target's rendered
// proof text; the first full match wins.
class MockProver final : public ProverClient {
public:
    struct Entry {
        std::string module;   // empty = any
        std::string target;   // empty = any
        std::string proof;    // empty = any, else rendered proof text
        Verdict verdict = Verdict::Rejected;
        std::string feedback;
    };

    MockProver() = default;
    explicit MockProver(std::vector<Entry> entries, Verdict default_verdict = Verdict::Rejected)
        : entries_(std::move(entries)), default_verdict_(default_verdict) {}

    static MockProver from_json(const nlohmann::json& j) {
        MockProver mock;
        if (j.contains("default")) mock.default_verdict_ = verdict_from_name(j["default"]);
        if (j.contains("default_feedback")) mock.default_feedback_ = j["default_feedback"];
        for (const auto& e : j.value("entries", nlohmann::json::array())) {
            Entry entry;
            entry.module = e.value("module", "");
            entry.target = e.value("target", "");
            entry.proof = e.value("proof", "");
            entry.verdict = verdict_from_name(e.value("verdict", "rejected"));
            entry.feedback = e.value("feedback", "");
            mock.entries_.push_back(std::move(entry));
        }
        return mock;
    }

    static MockProver from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open mock prover script: " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }

    VerificationResult verify(const tla::TlaModule& module, const std::string& target_theorem,
                              const ProverConfig&) override {
        ++calls_;
        std::string proof_text;
        std::string target = target_theorem;
        const tla::Theorem* t = nullptr;
        if (!target.empty()) t = tla::find_theorem(module, target);
        if (t && t->proof) proof_text = tla::render_proof(*t->proof);

        const Entry* hit = nullptr;
        for (const auto& e : entries_) {
            if (!e.module.empty() && e.module != module.name) continue;
            if (!e.target.empty() && e.target != target) continue;
            if (!e.proof.empty() && e.proof != proof_text) continue;
            hit = &e;
            break;
        }

        Verdict verdict = hit ? hit->verdict : default_verdict_;
        VerificationResult result;
        result.verdict = verdict;
        result.raw_output = "mock prover: " + module.name +
                            (target.empty() ? "" : " theorem " + target) +
                            (proof_text.empty() ? "" : " proof '" + proof_text + "'") + " -> " +
                            verdict_name(verdict) + "\n";
        ObligationReport rep;
        rep.location = target.empty() ? module.name : target;
        rep.status = verdict == Verdict::Accepted ? "proved" : "failed";
        rep.backend = "mock";
        result.obligations.push_back(rep);
        if (verdict != Verdict::Accepted) {
            std::string fb = hit && !hit->feedback.empty() ? hit->feedback : default_feedback_;
            if (fb.empty())
                fb = "mock prover " + std::string(verdict_name(verdict)) + " for " +
                     (target.empty() ? module.name : target);
            result.tool_message = fb;
        }
        return result;
    }

    int calls() const { return calls_; }

private:
    static Verdict verdict_from_name(const std::string& name) {
        if (name == "accepted") return Verdict::Accepted;
        if (name == "timeout") return Verdict::Timeout;
        if (name == "tool_error") return Verdict::ToolError;
        return Verdict::Rejected;
    }

    std::vector<Entry> entries_;
    Verdict default_verdict_ = Verdict::Rejected;
    std::string default_feedback_;
    int calls_ = 0;
};

// ---------------------------------------------------------------------------
// Decomposition verification
// ---------------------------------------------------------------------------

// Checks that the sub-claims collectively establish the parent. Render
// failures report back without touching the prover; prover feedback is
// trimmed to the failing obligations.
inline std::pair<bool, std::string> verify_decomposition(
    ProverClient& prover, const claims::ProofObligation& ob,
    const std::vector<claims::NormalizedClaim>& subs, const ProverConfig& cfg,
    std::vector<std::string>* by_defs_out = nullptr) {
    if (subs.empty()) return {false, "decomposition contains no sub-claims"};

    auto context_names = claims::context_symbol_names(ob);
    std::vector<std::string> problems;
    for (const auto& c : subs)
        for (const auto& p : claims::validate_claim(c, context_names)) problems.push_back(p);
    if (!problems.empty()) return {false, support::join(problems, "\n")};

    tla::TlaModule module = build_verification_module(ob, subs, by_defs_out);
    VerificationResult result = prover.verify(module, ob.goal_name, cfg);
    if (result.accepted()) return {true, ""};
    return {false, result.feedback()};
}

}  // namespace proofpilot::prover
