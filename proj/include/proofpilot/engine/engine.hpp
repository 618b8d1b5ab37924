#pragma once

#include <chrono>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "proofpilot/claims/claims.hpp"
#include "proofpilot/llm/client.hpp"
#include "proofpilot/llm/decomposition.hpp"
#include "proofpilot/llm/prompts.hpp"
#include "proofpilot/prover/prover.hpp"
#include "proofpilot/sapg/sapg.hpp"
#include "proofpilot/support/clock.hpp"

namespace proofpilot::engine {

struct Budget {
    int max_decomp_attempts = 4;  // LLM decomposition attempts per claim
    int max_dlpg_retries = 4;     // direct-generation attempts per obligation
    int max_depth = 5;            // recursion depth cap
    std::optional<double> run_deadline_seconds;
};

struct Deps {
    prover::ProverClient* prover = nullptr;
    prover::ProverConfig prover_cfg;
    llm::ChatClient* chat = nullptr;  // may stay null for symbolic-only flows
    llm::QueryLog* log = nullptr;
    support::Clock* clock = nullptr;
    bool minimize_context = false;   // appendix option, off by default
    bool falsify_subclaims = false;  // appendix option, off by default
    std::string format_instructions = llm::default_format_instructions();
    int transport_retries = 3;

    support::Clock& the_clock() const {
        return clock ? *clock : support::default_clock();
    }
};

struct RunReport {
    enum class Outcome { CompleteProof, Failure };

    Outcome outcome = Outcome::Failure;
    std::string module_text;  // complete proofs only
    std::optional<claims::ProofNode> tree;
    std::string failure_stage;
    long query_count = 0;
    double elapsed_seconds = 0;
    int syn_valid = 0;  // syntactically valid model outputs
    int syn_total = 0;  // model outputs checked for validity

    bool complete() const { return outcome == Outcome::CompleteProof; }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["outcome"] = complete() ? "complete_proof" : "failure";
        if (!failure_stage.empty()) j["failure_stage"] = failure_stage;
        if (!module_text.empty()) j["module"] = module_text;
        if (tree) j["proof_tree"] = claims::proof_tree_to_json(*tree);
        j["query_count"] = query_count;
        j["elapsed_seconds"] = elapsed_seconds;
        j["syntactic_validity"] = {{"valid", syn_valid}, {"total", syn_total}};
        return j;
    }
};

// ---------------------------------------------------------------------------
// Context minimization (appendix option)
// ---------------------------------------------------------------------------

// Filters the context to the definitions transitively reachable from the
// goal; facts survive only if everything they mention stays reachable.
// Imports are always kept.
inline claims::ProofObligation minimize_context(const claims::ProofObligation& ob) {
    auto idx = sapg::detail::index_context(ob);
    std::vector<std::string> closure =
        sapg::detail::unfold_closure(idx, tla::claim_free_symbols(ob.goal), /*strict=*/false);
    std::set<std::string> keep(closure.begin(), closure.end());

    claims::ProofObligation out;
    out.imports = ob.imports;
    out.goal_name = ob.goal_name;
    out.goal = ob.goal;
    for (const auto& u : ob.context) {
        if (const auto* d = std::get_if<tla::Definition>(&u)) {
            if (keep.count(d->name)) out.context.push_back(u);
        } else if (const auto* t = std::get_if<tla::Theorem>(&u)) {
            bool ok = true;
            for (const auto& sym : tla::claim_free_symbols(t->statement))
                ok &= keep.count(sym) > 0;
            if (ok) out.context.push_back(u);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Falsification (appendix option)
// ---------------------------------------------------------------------------

enum class Falsification { Falsified, NotFalsified };

// Tries to prove the negation of the claim's implication form:
// \E decls : assumptions /\ ~hypothesis. Prover trouble of any kind counts
// as NotFalsified.
inline Falsification falsify_subclaim(const claims::NormalizedClaim& c,
                                      const claims::ProofObligation& ob,
                                      prover::ProverClient& prover_client,
                                      const prover::ProverConfig& cfg) {
    try {
        tla::ExprPtr body;
        for (const auto& a : c.assumptions) {
            if (const auto* ea = std::get_if<claims::ExprAssumption>(&a)) {
                body = body ? tla::make_binary("/\\", body, ea->expr) : ea->expr;
            }
        }
        tla::ExprPtr negated = tla::make_unary("~", c.hypothesis);
        body = body ? tla::make_binary("/\\", body, negated) : negated;
        for (auto it = c.assumptions.rbegin(); it != c.assumptions.rend(); ++it) {
            if (const auto* d = std::get_if<claims::NewDecl>(&*it))
                body = tla::make_quant("\\E", {d->var},
                                       tla::make_ident(claims::domain_name(d->domain)), body);
        }

        claims::ProofObligation neg;
        neg.imports = ob.imports;
        neg.context = ob.context;
        neg.goal_name = c.name + "_negation";
        neg.goal = tla::make_plain_claim(body);

        sapg::AutoProofPlan plan = sapg::generate_auto_proof(neg);
        tla::TlaModule module = prover::build_verification_module(neg, plan.proof);
        prover::VerificationResult vr = prover_client.verify(module, neg.goal_name, cfg);
        return vr.accepted() ? Falsification::Falsified : Falsification::NotFalsified;
    } catch (const std::exception&) {
        return Falsification::NotFalsified;
    }
}

// ---------------------------------------------------------------------------
// Hierarchical proof generation
// ---------------------------------------------------------------------------

namespace detail {

struct RunState {
    double started_at = 0;
    std::set<std::string> taken_names;  // context symbols + every sub-claim name issued
};

inline bool past_deadline(const Budget& budget, const Deps& deps, RunState& state) {
    if (!budget.run_deadline_seconds) return false;
    return deps.the_clock().now_seconds() - state.started_at > *budget.run_deadline_seconds;
}

// Transport failures do not consume a reasoning attempt; they are retried a
// bounded number of times and then abort the decomposition loop.
inline std::optional<std::string> complete_with_transport_retry(const Deps& deps,
                                                                const llm::ChatRequest& req,
                                                                std::string& transport_error) {
    for (int i = 0; i <= deps.transport_retries; ++i) {
        try {
            return deps.chat->complete(req);
        } catch (const llm::RateLimited& e) {
            transport_error = e.what();
            std::this_thread::sleep_for(std::chrono::duration<double>(
                std::min(e.retry_after_seconds(), 2.0)));
        } catch (const llm::TransportError& e) {
            transport_error = e.what();
        }
    }
    return std::nullopt;
}

inline claims::ProofNode prove_obligation_impl(claims::ProofObligation ob, const Budget& budget,
                                               const Deps& deps, int depth, RunState& state) {
    claims::ProofNode node;
    node.name = ob.goal_name;
    node.claim = ob.goal;

    if (deps.minimize_context) ob = minimize_context(ob);

    // Auto proof first: no LLM query happens before this attempt.
    sapg::AutoProofPlan plan = sapg::generate_auto_proof(ob);
    tla::TlaModule auto_module = prover::build_verification_module(ob, plan.proof);
    prover::VerificationResult auto_result =
        deps.prover->verify(auto_module, ob.goal_name, deps.prover_cfg);
    if (auto_result.accepted()) {
        node.form = claims::ProofNode::Form::Auto;
        node.auto_proof = plan.proof;
        node.auto_accepted = true;
        node.status = claims::claim_status(node);
        return node;
    }
    node.attempts.push_back({0, {}, std::string("auto_") + prover::verdict_name(auto_result.verdict),
                             auto_result.feedback()});

    if (depth >= budget.max_depth) {
        node.form = claims::ProofNode::Form::None;
        node.attempts.push_back({0, {}, "budget_exhausted", "recursion depth cap reached"});
        node.status = claims::Status::Unproved;
        return node;
    }
    if (!deps.chat) {
        node.form = claims::ProofNode::Form::None;
        node.attempts.push_back({0, {}, "no_llm", "no language model configured"});
        node.status = claims::Status::Unproved;
        return node;
    }

    auto context_names = claims::context_symbol_names(ob);
    std::string feedback;
    std::set<std::string> fingerprints_tried;
    std::optional<std::vector<claims::NormalizedClaim>> verified_subs;

    for (int attempt = 1; attempt <= budget.max_decomp_attempts; ++attempt) {
        if (past_deadline(budget, deps, state)) {
            node.attempts.push_back({attempt, {}, "budget_exhausted", "run deadline reached"});
            break;
        }
        std::string prompt = llm::build_decomposition_prompt(ob, deps.format_instructions,
                                                             feedback);
        std::string transport_error;
        auto response = complete_with_transport_retry(
            deps, {llm::QueryPurpose::Decompose, "", prompt}, transport_error);
        if (!response) {
            node.attempts.push_back({attempt, {}, "transport_error", transport_error});
            break;
        }

        claims::AttemptRecord rec;
        rec.attempt = attempt;

        llm::DecompositionParse parsed =
            llm::parse_decomposition_response(*response, context_names);
        if (!parsed.ok()) {
            rec.verdict = "parse_failure";
            rec.feedback = parsed.error_text();
            feedback = rec.feedback;
            node.attempts.push_back(std::move(rec));
            continue;
        }

        std::set<std::string> taken = state.taken_names;
        taken.insert(context_names.begin(), context_names.end());
        taken.insert(ob.goal_name);
        std::vector<claims::NormalizedClaim> subs =
            claims::resolve_name_collisions(parsed.claims, taken);
        for (const auto& c : subs) rec.proposed.push_back(c.name);

        std::string fingerprint = claims::decomposition_fingerprint(subs);
        if (fingerprints_tried.count(fingerprint)) {
            rec.verdict = "duplicate";
            rec.feedback = "this decomposition was already proposed and did not verify; " +
                           feedback;
            node.attempts.push_back(std::move(rec));
            continue;
        }
        fingerprints_tried.insert(fingerprint);

        if (deps.falsify_subclaims) {
            bool falsified = false;
            for (const auto& c : subs) {
                if (falsify_subclaim(c, ob, *deps.prover, deps.prover_cfg) ==
                    Falsification::Falsified) {
                    rec.verdict = "falsified";
                    rec.feedback = "sub-claim " + c.name +
                                   " is false: the prover established its negation";
                    falsified = true;
                    break;
                }
            }
            if (falsified) {
                feedback = rec.feedback;
                node.attempts.push_back(std::move(rec));
                continue;
            }
        }

        std::vector<std::string> by_defs;
        auto [valid, fb] =
            prover::verify_decomposition(*deps.prover, ob, subs, deps.prover_cfg, &by_defs);
        if (valid) {
            rec.verdict = "accepted";
            for (const auto& c : subs) state.taken_names.insert(c.name);
            node.attempts.push_back(std::move(rec));
            node.by_defs = by_defs;
            verified_subs = std::move(subs);
            break;
        }
        rec.verdict = "rejected";
        rec.feedback = fb;
        feedback = fb;
        node.attempts.push_back(std::move(rec));
    }

    if (!verified_subs) {
        node.form = claims::ProofNode::Form::None;
        node.status = claims::Status::Unproved;
        return node;
    }

    node.form = claims::ProofNode::Form::BySubClaims;
    node.decomposition_verified = true;
    auto context_name_set = claims::context_symbol_names(ob);
    for (const auto& sub : *verified_subs) {
        tla::Theorem t = claims::render_assume_prove(sub, context_name_set);
        claims::ProofObligation child;
        child.imports = ob.imports;
        child.context = ob.context;  // sub-claims are self-contained
        child.goal_name = sub.name;
        child.goal = t.statement;
        node.children.push_back(prove_obligation_impl(std::move(child), budget, deps, depth + 1,
                                                      state));
    }
    node.status = claims::claim_status(node);
    return node;
}

inline std::string extract_module_text(const std::string& response) {
    size_t pos = 0;
    while ((pos = response.find("```", pos)) != std::string::npos) {
        size_t body_start = response.find('\n', pos);
        if (body_start == std::string::npos) break;
        size_t close = response.find("```", body_start);
        if (close == std::string::npos) break;
        std::string body = response.substr(body_start + 1, close - body_start - 1);
        if (body.find("MODULE") != std::string::npos) return body;
        pos = close + 3;
    }
    size_t header = response.find("----");
    size_t footer = response.rfind("====");
    if (header != std::string::npos && footer != std::string::npos && footer > header)
        return response.substr(header, footer + 4 - header);
    return support::trim(response);
}

}  // namespace detail

// Algorithm: try an auto proof; otherwise ask for decompositions under the
// per-claim attempt budget, verifying each; recurse into the sub-claims of
// the first verified decomposition. A failed child leaves siblings running
// and marks this node unproved, trail preserved.
inline claims::ProofNode prove_obligation(const claims::ProofObligation& ob, const Budget& budget,
                                          const Deps& deps) {
    detail::RunState state;
    state.started_at = deps.the_clock().now_seconds();
    return detail::prove_obligation_impl(ob, budget, deps, 0, state);
}

// ---------------------------------------------------------------------------
// Proof assembly
// ---------------------------------------------------------------------------

namespace detail {

inline tla::Proof proof_of_node(const claims::ProofNode& n) {
    switch (n.form) {
        case claims::ProofNode::Form::Auto:
            return claims::to_tla_proof(n.auto_proof);
        case claims::ProofNode::Form::BySubClaims: {
            std::vector<std::string> names;
            for (const auto& c : n.children) names.push_back(c.name);
            return tla::by_proof(names, n.by_defs);
        }
        case claims::ProofNode::Form::Opaque:
            return tla::opaque_proof(n.opaque_proof);
        case claims::ProofNode::Form::None:
            break;
    }
    return tla::omitted_proof();
}

inline void collect_subclaim_theorems(const claims::ProofNode& n,
                                      std::vector<tla::Theorem>& out, bool is_root) {
    for (const auto& c : n.children) collect_subclaim_theorems(c, out, false);
    if (!is_root) {
        tla::Theorem t;
        t.name = n.name;
        t.statement = n.claim;
        t.proof = proof_of_node(n);
        out.push_back(std::move(t));
    }
}

}  // namespace detail

// Emits the original module with the verified sub-claim theorems inserted
// before the goal theorem, children before parents, and the goal theorem
// carrying its BY step.
inline tla::TlaModule assemble_proof(const claims::ProofNode& root,
                                     const tla::TlaModule& original) {
    if (claims::claim_status(root) != claims::Status::Proved)
        throw claims::ClaimError(claims::ClaimError::Kind::RootUnproved, root.name);

    std::vector<tla::Theorem> inserted;
    detail::collect_subclaim_theorems(root, inserted, true);

    tla::TlaModule out;
    out.name = original.name;
    out.extends = original.extends;
    for (const auto& u : original.units) {
        if (const auto* t = std::get_if<tla::Theorem>(&u)) {
            if (t->name && *t->name == root.name) {
                for (auto& sub : inserted) out.units.push_back(sub);
                tla::Theorem goal = *t;
                goal.proof = detail::proof_of_node(root);
                out.units.push_back(std::move(goal));
                continue;
            }
        }
        out.units.push_back(u);
    }
    return out;
}

// LMGPA end to end for one theorem of a module: prove, then assemble.
inline RunReport lmgpa_prove(const tla::TlaModule& module, const std::string& theorem_name,
                             const Budget& budget, const Deps& deps) {
    const tla::Theorem* t = tla::find_theorem(module, theorem_name);
    if (!t) throw std::invalid_argument("no theorem named '" + theorem_name + "'");
    if (t->proof) throw std::invalid_argument("theorem '" + theorem_name + "' is already proved");

    RunReport report;
    support::Clock& clock = deps.the_clock();
    double t0 = clock.now_seconds();
    size_t q0 = deps.log ? deps.log->size() : 0;

    claims::ProofObligation ob = claims::obligation_for_theorem(module, theorem_name);
    claims::ProofNode root = prove_obligation(ob, budget, deps);

    // decomposition queries: parse failures are the syntactically invalid ones
    std::vector<const claims::ProofNode*> stack{&root};
    while (!stack.empty()) {
        const claims::ProofNode* n = stack.back();
        stack.pop_back();
        for (const auto& a : n->attempts) {
            if (a.verdict == "parse_failure") {
                ++report.syn_total;
            } else if (a.verdict == "accepted" || a.verdict == "rejected" ||
                       a.verdict == "falsified" || a.verdict == "duplicate") {
                ++report.syn_total;
                ++report.syn_valid;
            }
        }
        for (const auto& c : n->children) stack.push_back(&c);
    }

    if (claims::claim_status(root) == claims::Status::Proved) {
        tla::TlaModule assembled = assemble_proof(root, module);
        report.outcome = RunReport::Outcome::CompleteProof;
        report.module_text = tla::render_module(assembled);
    } else {
        report.outcome = RunReport::Outcome::Failure;
        report.failure_stage = "hierarchical proof search exhausted its budget";
    }
    report.tree = std::move(root);
    report.query_count = static_cast<long>((deps.log ? deps.log->size() : 0) - q0);
    report.elapsed_seconds = clock.now_seconds() - t0;
    return report;
}

// ---------------------------------------------------------------------------
// Direct LLM-based proof generation (baseline)
// ---------------------------------------------------------------------------

// Ask the model for a complete proof of the whole module, verify, and feed
// the diagnostics back on failure, up to the retry budget.
inline RunReport dlpg_prove(const tla::TlaModule& module, const std::string& theorem_name,
                            const Budget& budget, const Deps& deps) {
    const tla::Theorem* t = tla::find_theorem(module, theorem_name);
    if (!t) throw std::invalid_argument("no theorem named '" + theorem_name + "'");
    if (t->proof) throw std::invalid_argument("theorem '" + theorem_name + "' is already proved");
    if (!deps.chat) throw std::invalid_argument("direct generation needs a language model");

    RunReport report;
    support::Clock& clock = deps.the_clock();
    double t0 = clock.now_seconds();
    size_t q0 = deps.log ? deps.log->size() : 0;

    claims::ProofNode root;
    root.name = theorem_name;
    root.claim = t->statement;
    root.form = claims::ProofNode::Form::Opaque;

    std::string feedback;
    for (int attempt = 1; attempt <= budget.max_dlpg_retries; ++attempt) {
        auto [system, user] = llm::build_dlpg_prompt(module, theorem_name, feedback);
        std::string transport_error;
        auto response = detail::complete_with_transport_retry(
            deps, {llm::QueryPurpose::DlpgProve, system, user}, transport_error);
        if (!response) {
            root.attempts.push_back({attempt, {}, "transport_error", transport_error});
            break;
        }

        ++report.syn_total;
        std::string module_text = detail::extract_module_text(*response);
        tla::TlaModule candidate;
        try {
            candidate = tla::parse_module(module_text);
        } catch (const tla::SyntaxError& e) {
            feedback = e.what();
            root.attempts.push_back({attempt, {}, "parse_failure", feedback});
            continue;
        }
        ++report.syn_valid;

        prover::VerificationResult vr = deps.prover->verify(candidate, "", deps.prover_cfg);
        if (vr.accepted()) {
            root.attempts.push_back({attempt, {}, "accepted", ""});
            root.opaque_proof = module_text;
            root.opaque_accepted = true;
            root.status = claims::Status::Proved;
            report.outcome = RunReport::Outcome::CompleteProof;
            report.module_text = tla::render_module(candidate);
            break;
        }
        feedback = vr.feedback();
        root.attempts.push_back({attempt, {}, prover::verdict_name(vr.verdict), feedback});
    }

    if (!report.complete()) {
        root.status = claims::Status::Unproved;
        report.outcome = RunReport::Outcome::Failure;
        report.failure_stage = "direct generation exhausted its retry budget";
    }
    report.tree = std::move(root);
    report.query_count = static_cast<long>((deps.log ? deps.log->size() : 0) - q0);
    report.elapsed_seconds = clock.now_seconds() - t0;
    return report;
}

}  // namespace proofpilot::engine
