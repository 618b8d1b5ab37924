#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "proofpilot/claims/claims.hpp"
#include "proofpilot/tla/printer.hpp"

namespace proofpilot::llm {

// ---------------------------------------------------------------------------
// Decomposition prompt
// ---------------------------------------------------------------------------

inline const char* decomposition_prompt_template() {
    return R"__pp(You are an expert specializing in decomposing complex TLA+
proof obligations into simpler sub-obligations. Your task is to
analyze this proof obligation and generate a logically sound
decomposition:

Format Instructions:
{format_instructions}

Context
{proof_context}

Goal:
{goal_obligation}

{{FEEDBACK_INFO}}

Follow these steps:
1. First, identify the key mathematical pattern or structure in this theorem
2. Express the transformation mathematically using TLA+ syntax, minimal drafts only
3. Break down the theorem into the simplest sub-claims that would establish the result
4. For each sub-claim, the final result should be ONLY in the following format:
   - A clear name
   - Necessary assumptions in TLA+ syntax
   - The precise hypothesis to prove
5. Provide an explanation of why the decomposition is valid, and why the new claims
are easier to prove
6. Ensure your decomposition is sufficient to prove the original theorem,
and explain why.
7. For every proposed sub-claim, check if it is valid, and if not, provide an explanation of why it is not valid,
and how to fix it.
8. Try to fix the decomposition and subclaims until both the decomposition and subclaims are valid.
9. Write each of the simpler formula in a normalized form such that:
    - it has a name
    - it has a list of assumptions, where each assumption is either:
        - an expression, or
        - a definition identifier provided above
    - it has a hypothesis (goal) to prove, which is also a formula
    - PLEASE STRICTLY FOLLOW THE FORMAT INSTRUCTION
    - DON'T USE ENGLISH OR UNICODE. For logical symbols, use ASCII version, e.g.
        - \A for \forall
        - \E for \exists
        - /\ for and
        - \/ for or
        - => for implication
        - <=> for iff
        - = for equality
        - /= for inequality
        - \in for set membership
        - Nat for natural number set
        - Int for integer set
        - Only +, -, *, % for arithmetic operators
        - "NEW x \in Nat" or "NEW x \in Int" for adding new variables with domain, but this is only used in assumptions.
    - Every claim must be self-contained, that is, if there exists any free variables,
      then you need to add "NEW x \in Nat" or "NEW x \in Int" to the assumptions to specify the domain of that new variable
        - For example, if you generated a claim with 'Even(x)' as assumption,
          then you should add "NEW x \in Nat" to the assumptions to specify the domain of that new variable.
10. Double check the generated sub-claims, make sure there are no free variables left. Every variable used in assumptions and hypothesis should be defined as
   "NEW x \in Nat" in the assumptions.
11. Once done, conclude the sub-claims and return them in required format.

Guidelines:
- Use notation and syntax directly we mentioned above
- Limit explanations to 5-10 words per insight
- Focus on key mathematical properties and patterns (number theory properties, set relations, etc.)
- For each transformation, state the mathematical justification in <= 5 words
- Write each sub-claim in a normalized form with:
  - name='NAME'
  - assumptions=['ASSUMPTION1', 'ASSUMPTION2', ...]
  - hypothesis='GOAL'
- Use ASCII notation only for logical symbols (e.g., \A, \E, /\, \/, =>)
- Ensure all variables are properly quantified or declared
- Double-check for free variables

Here is a simple example of a normalized claim:
    name='L1'
    assumptions=['NEW x \in Nat', 'NEW y \in Nat', '0 < y', 'y < x', 'x + y + (x * y) = 3']
    hypothesis='(x + 1) * (y + 1) = 4'
)__pp";
}

// The machine-readable carrier for the normalized records: a fenced JSON
// array of {name, assumptions, hypothesis}.
inline const char* default_format_instructions() {
    return R"__pp(Return the final sub-claims as a JSON array inside a fenced code block marked json.
Each array element must be an object with exactly these fields:
  - "name": a TLA+ identifier naming the sub-claim
  - "assumptions": an array of strings; each string is either an expression in the
    ASCII TLA+ subset, a definition identifier from the context, or a declaration
    of the form "NEW x \in Nat" or "NEW x \in Int"
  - "hypothesis": the goal expression to prove, as a string
Escape every backslash inside JSON strings (write "NEW x \\in Nat" for NEW x \in Nat).
Example:
```json
[
  {
    "name": "L1",
    "assumptions": ["NEW x \\in Nat", "NEW y \\in Nat", "0 < y", "y < x", "x + y + (x * y) = 3"],
    "hypothesis": "(x + 1) * (y + 1) = 4"
  }
]
```
Output exactly one such fenced JSON block.)__pp";
}

namespace detail {

inline std::string render_context_for_prompt(const claims::ProofObligation& ob) {
    std::string out;
    if (!ob.imports.empty()) out += "EXTENDS " + support::join(ob.imports, ", ") + "\n";
    for (const auto& u : ob.context) {
        if (const auto* t = std::get_if<tla::Theorem>(&u)) {
            tla::Theorem stripped = *t;
            stripped.proof.reset();
            out += tla::render_theorem(stripped) + "\n";
        } else if (std::holds_alternative<tla::Definition>(u)) {
            out += tla::render_unit(u) + "\n";
        }
    }
    if (out.empty()) out = "(no definitions or facts in scope)\n";
    return out;
}

}  // namespace detail

// Instantiates the decomposition template. `feedback`, when present, fills
// the {{FEEDBACK_INFO}} slot with the prover's output; otherwise the slot is
// empty.
inline std::string build_decomposition_prompt(const claims::ProofObligation& ob,
                                              const std::string& format_instructions,
                                              const std::string& feedback = "") {
    tla::Theorem goal;
    goal.name = ob.goal_name;
    goal.statement = ob.goal;

    std::string feedback_info;
    if (!feedback.empty())
        feedback_info =
            "Feedback from the previous attempt:\n```\n" + feedback + "\n```";

    std::string prompt = decomposition_prompt_template();
    prompt = support::replace_all(std::move(prompt), "{format_instructions}",
                                  format_instructions);
    prompt = support::replace_all(std::move(prompt), "{proof_context}",
                                  detail::render_context_for_prompt(ob));
    prompt = support::replace_all(std::move(prompt), "{goal_obligation}",
                                  tla::render_theorem(goal));
    prompt = support::replace_all(std::move(prompt), "{{FEEDBACK_INFO}}", feedback_info);
    return prompt;
}

// ---------------------------------------------------------------------------
// Direct proof generation prompt
// ---------------------------------------------------------------------------

inline const char* dlpg_system_prompt() {
    return R"__pp(You are an expert in TLA+ formal verification. Your task is to generate a complete, valid TLA+ proof for the given theorem.

Guidelines:
1. Generate a syntactically valid TLA+ proof using hierarchical proof structure with step numbers like <1>, <2>, etc.
2. Use proper TLA+ proof constructs: CASE, SUFFICES, TAKE, BY, etc.
3. Include necessary DEF references when using BY statements
4. Ensure all steps are properly justified
5. The proof should be complete and directly verifiable by TLAPM
6. DO NOT include any explanations or comments outside the TLA+ syntax
7. Return ONLY the complete TLA+ module with your proof integrated

Example of good proof structure:
```
THEOREM Example == \A x \in Nat: x + 0 = x
<1> SUFFICES ASSUME NEW x \in Nat
           PROVE  x + 0 = x
  OBVIOUS
<1>1 x + 0 = x BY SMT
<1> QED BY <1>1
```
)__pp";
}

inline const char* dlpg_user_prompt_template() {
    return R"__pp(Here is a TLA+ module with a theorem that needs to be proved:

```
{tla_content}
```

Please generate a complete proof for the theorem '{theorem_name}'

[IF_FAILED]((
Your previous proof attempt had the following issues when verified by TLAPM:

```
{feedback}
```

Please fix these issues and provide an improved proof that addresses these specific problems.
))

Return the entire TLA+ module with your proof integrated. The proof should be syntactically valid and verifiable by TLAPM.
)__pp";
}

// (system, user) prompt pair. The [IF_FAILED]((...)) block is omitted
// entirely on the first attempt and carries the diagnostics on retries.
inline std::pair<std::string, std::string> build_dlpg_prompt(const tla::TlaModule& module,
                                                             const std::string& theorem_name,
                                                             const std::string& feedback = "") {
    if (!tla::find_theorem(module, theorem_name))
        throw std::invalid_argument("module '" + module.name + "' has no theorem named '" +
                                    theorem_name + "'");

    std::string user = dlpg_user_prompt_template();
    const std::string begin_tag = "[IF_FAILED]((";
    const std::string end_tag = "))";
    size_t begin = user.find(begin_tag);
    size_t end = user.find(end_tag, begin + begin_tag.size());
    if (begin != std::string::npos && end != std::string::npos) {
        if (feedback.empty()) {
            size_t cut_end = end + end_tag.size();
            if (cut_end < user.size() && user[cut_end] == '\n') ++cut_end;
            size_t cut_begin = begin;
            while (cut_begin > 0 && user[cut_begin - 1] == '\n' && cut_begin > 1 &&
                   user[cut_begin - 2] == '\n')
                --cut_begin;
            user.erase(cut_begin, cut_end - cut_begin);
        } else {
            std::string inner = user.substr(begin + begin_tag.size(),
                                            end - begin - begin_tag.size());
            user.replace(begin, end + end_tag.size() - begin, inner);
        }
    }

    std::string content = module.source.empty() ? tla::render_module(module) : module.source;
    user = support::replace_all(std::move(user), "{tla_content}", content);
    user = support::replace_all(std::move(user), "{theorem_name}", theorem_name);
    user = support::replace_all(std::move(user), "{feedback}", feedback);
    return {dlpg_system_prompt(), user};
}

}  // namespace proofpilot::llm
