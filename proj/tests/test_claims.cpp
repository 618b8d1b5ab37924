#include <catch2/catch_amalgamated.hpp>

#include "proofpilot/claims/claims.hpp"
#include "support/generators.hpp"
#include "support/trees.hpp"

using namespace proofpilot;

namespace {

claims::NormalizedClaim worked_example_claim() {
    claims::NormalizedClaim c;
    c.name = "L1";
    c.assumptions = {claims::NewDecl{"x", claims::Domain::Nat},
                     claims::NewDecl{"y", claims::Domain::Nat},
                     claims::ExprAssumption{tla::parse_expression("0 < y")},
                     claims::ExprAssumption{tla::parse_expression("y < x")},
                     claims::ExprAssumption{tla::parse_expression("x + y + (x * y) = 3")}};
    c.hypothesis = tla::parse_expression("(x + 1) * (y + 1) = 4");
    return c;
}

}  // namespace

TEST_CASE("render_assume_prove emits the worked example") {
    tla::Theorem t = claims::render_assume_prove(worked_example_claim());
    REQUIRE(t.name == "L1");
    REQUIRE(t.statement.is_assume_prove());
    CHECK(tla::render_claim(t.statement) ==
          "ASSUME NEW x \\in Nat, NEW y \\in Nat, 0 < y, y < x, x + y + x * y = 3 "
          "PROVE (x + 1) * (y + 1) = 4");

    // the rendered theorem parses back structurally equal
    tla::TlaModule m;
    m.name = "M";
    m.units.push_back(t);
    tla::TlaModule again = tla::parse_module(tla::render_module(m));
    CHECK(tla::module_equal(m, again));
}

TEST_CASE("render_assume_prove trivial single-declaration claim") {
    claims::NormalizedClaim c;
    c.name = "T";
    c.assumptions = {claims::NewDecl{"n", claims::Domain::Nat}};
    c.hypothesis = tla::parse_expression("n = n");
    tla::Theorem t = claims::render_assume_prove(c);
    CHECK(tla::render_claim(t.statement) == "ASSUME NEW n \\in Nat PROVE n = n");
}

TEST_CASE("unbound variables are rejected before any prover call") {
    claims::NormalizedClaim c = worked_example_claim();
    // delete the declaration of y: y is now free in assumptions and hypothesis
    c.assumptions.erase(c.assumptions.begin() + 1);

    auto problems = claims::validate_claim(c);
    REQUIRE_FALSE(problems.empty());
    CHECK(problems.front().find("'y'") != std::string::npos);

    try {
        claims::render_assume_prove(c);
        FAIL("expected UnboundVariable");
    } catch (const claims::ClaimError& e) {
        CHECK(e.kind() == claims::ClaimError::Kind::UnboundVariable);
        CHECK(e.detail() == "y");
    }
}

TEST_CASE("invalid identifiers are rejected") {
    claims::NormalizedClaim c = worked_example_claim();
    for (const char* bad : {"1st", "BY", "", "has-dash", "_"}) {
        c.name = bad;
        CHECK_FALSE(claims::validate_claim(c).empty());
        CHECK_THROWS_AS(claims::render_assume_prove(c), claims::ClaimError);
    }
    CHECK(claims::is_valid_identifier("ExistenceOfM_1"));
    CHECK(claims::is_valid_identifier("L1"));
}

TEST_CASE("definition references render into BY, not ASSUME") {
    claims::NormalizedClaim c;
    c.name = "UsesCube";
    c.assumptions = {claims::NewDecl{"x", claims::Domain::Int}, claims::DefRef{"Cube"}};
    c.hypothesis = tla::parse_expression("Cube(x) = x * x * x");
    std::set<std::string> context = {"Cube"};
    REQUIRE(claims::validate_claim(c, context).empty());
    tla::Theorem t = claims::render_assume_prove(c, context);
    REQUIRE(t.statement.is_assume_prove());
    CHECK(t.statement.assume_prove().assumptions.size() == 1);  // the DefRef stays out
    CHECK(claims::def_refs(c) == std::vector<std::string>{"Cube"});
}

TEST_CASE("claims whose assumptions are all DefRefs render as plain theorems") {
    claims::NormalizedClaim c;
    c.name = "JustGoal";
    c.assumptions = {claims::DefRef{"Odd"}};
    c.hypothesis = tla::parse_expression("Odd(2) \\/ ~Odd(2)");
    tla::Theorem t = claims::render_assume_prove(c, {"Odd"});
    CHECK_FALSE(t.statement.is_assume_prove());
}

TEST_CASE("decomposition obligations add sub-claims as assumed facts") {
    tla::TlaModule m = tla::parse_module(
        "---- MODULE quadratic ----\nEXTENDS Integers\n"
        "THEOREM Main == \\A x \\in Int : x * x - 5 * x + 6 = 0 => x = 2 \\/ x = 3\n====\n");
    claims::ProofObligation parent = claims::obligation_for_theorem(m, "Main");
    CHECK(parent.imports == std::vector<std::string>{"Integers"});
    CHECK(parent.context.empty());

    claims::NormalizedClaim factor;
    factor.name = "FactorForm";
    factor.assumptions = {claims::NewDecl{"x", claims::Domain::Int},
                          claims::ExprAssumption{tla::parse_expression("x * x - 5 * x + 6 = 0")}};
    factor.hypothesis = tla::parse_expression("(x - 2) * (x - 3) = 0");
    claims::NormalizedClaim solve;
    solve.name = "SolveFactors";
    solve.assumptions = {claims::NewDecl{"x", claims::Domain::Int},
                         claims::ExprAssumption{tla::parse_expression("(x - 2) * (x - 3) = 0")}};
    solve.hypothesis = tla::parse_expression("x = 2 \\/ x = 3");

    claims::ProofObligation ob = claims::decomposition_obligation(parent, {factor, solve});
    REQUIRE(ob.context.size() == 2);
    const auto* f = std::get_if<tla::Theorem>(&ob.context[0]);
    REQUIRE(f != nullptr);
    CHECK(*f->name == "FactorForm");
    REQUIRE(f->proof);
    CHECK(f->proof->kind == tla::ProofKind::Omitted);
    CHECK(ob.goal_name == "Main");

    CHECK_THROWS_AS(claims::decomposition_obligation(parent, {}), claims::ClaimError);
}

TEST_CASE("self-decomposition produces a trivially shaped obligation") {
    tla::TlaModule m = tla::parse_module("---- MODULE M ----\nTHEOREM G == 1 + 1 = 2\n====\n");
    claims::ProofObligation parent = claims::obligation_for_theorem(m, "G");
    claims::NormalizedClaim same;
    same.name = "G_restated";
    same.hypothesis = tla::parse_expression("1 + 1 = 2");
    claims::ProofObligation ob = claims::decomposition_obligation(parent, {same});
    REQUIRE(ob.context.size() == 1);
    CHECK(tla::claim_equal(std::get<tla::Theorem>(ob.context[0]).statement, parent.goal));
}

TEST_CASE("claim_status worked examples") {
    claims::ProofNode leaf;
    leaf.name = "L";
    leaf.form = claims::ProofNode::Form::Auto;
    leaf.auto_accepted = true;
    CHECK(claims::claim_status(leaf) == claims::Status::Proved);

    claims::ProofNode factor = leaf;
    factor.name = "FactorForm";
    claims::ProofNode solve = leaf;
    solve.name = "SolveFactors";
    claims::ProofNode main;
    main.name = "Main";
    main.form = claims::ProofNode::Form::BySubClaims;
    main.decomposition_verified = true;
    main.children = {factor, solve};
    CHECK(claims::claim_status(main) == claims::Status::Proved);

    // flip one leaf verdict: the root flips to unproved
    main.children[1].auto_accepted = false;
    CHECK(claims::claim_status(main) == claims::Status::Unproved);
}

TEST_CASE("claim_status matches the truth-table oracle on all small trees") {
    int cases = 0;
    for (int n = 1; n <= 4; ++n) {
        for (const auto& shape : testtrees::shapes_of(n)) {
            for (unsigned bits = 0; bits < (1u << n); ++bits) {
                int i1 = 0, i2 = 0;
                claims::ProofNode node = testtrees::build_node(shape, bits, i1);
                bool expected = testtrees::oracle_proved(shape, bits, i2);
                INFO("n=" << n << " bits=" << bits);
                CHECK((claims::claim_status(node) == claims::Status::Proved) == expected);
                ++cases;
            }
        }
    }
    CHECK(cases == 102);  // 1*2 + 1*4 + 2*8 + 5*16 verdict assignments
}

TEST_CASE("claim_status is monotone in child verdicts") {
    testgen::Gen g(777);
    for (int round = 0; round < 200; ++round) {
        int n = g.range(1, 4);
        auto shapes = testtrees::shapes_of(n);
        const auto& shape = shapes[static_cast<size_t>(g.range(0, int(shapes.size()) - 1))];
        unsigned bits = static_cast<unsigned>(g.range(0, (1 << n) - 1));
        int flip = g.range(0, n - 1);
        unsigned raised = bits | (1u << flip);  // one verdict Unproved -> Proved

        int i1 = 0, i2 = 0;
        bool before =
            claims::claim_status(testtrees::build_node(shape, bits, i1)) == claims::Status::Proved;
        bool after = claims::claim_status(testtrees::build_node(shape, raised, i2)) ==
                     claims::Status::Proved;
        CHECK((!before || after));  // proved stays proved
    }
}

TEST_CASE("a proved tree contains no proof-less node") {
    for (int n = 1; n <= 4; ++n) {
        for (const auto& shape : testtrees::shapes_of(n)) {
            for (unsigned bits = 0; bits < (1u << n); ++bits) {
                int i = 0;
                claims::ProofNode node = testtrees::build_node(shape, bits, i);
                if (claims::claim_status(node) != claims::Status::Proved) continue;
                std::vector<const claims::ProofNode*> stack{&node};
                while (!stack.empty()) {
                    const claims::ProofNode* cur = stack.back();
                    stack.pop_back();
                    CHECK(cur->form != claims::ProofNode::Form::None);
                    for (const auto& c : cur->children) stack.push_back(&c);
                }
            }
        }
    }
}

TEST_CASE("name collisions get numeric suffixes") {
    claims::NormalizedClaim a;
    a.name = "ExistenceOfM";
    a.hypothesis = tla::parse_expression("1 = 1");
    claims::NormalizedClaim b = a;
    b.name = "Helper";
    claims::NormalizedClaim c = a;  // duplicate of a

    auto resolved = claims::resolve_name_collisions({a, b, c}, {"ExistenceOfM", "Main"});
    CHECK(resolved[0].name == "ExistenceOfM_1");
    CHECK(resolved[1].name == "Helper");
    CHECK(resolved[2].name == "ExistenceOfM_2");
}

TEST_CASE("proof trees serialize to structured reports") {
    claims::ProofNode leaf;
    leaf.name = "FactorForm";
    leaf.form = claims::ProofNode::Form::Auto;
    leaf.auto_accepted = true;
    leaf.status = claims::Status::Proved;
    claims::ProofNode root;
    root.name = "Main";
    root.form = claims::ProofNode::Form::BySubClaims;
    root.decomposition_verified = true;
    root.children = {leaf};
    root.status = claims::Status::Proved;
    root.attempts.push_back({1, {"FactorForm"}, "accepted", ""});

    nlohmann::json j = claims::proof_tree_to_json(root);
    CHECK(j["name"] == "Main");
    CHECK(j["proof"] == "by_sub_claims");
    CHECK(j["status"] == "proved");
    REQUIRE(j["children"].size() == 1);
    CHECK(j["children"][0]["name"] == "FactorForm");
    CHECK(j["children"][0]["proof"] == "auto");
    CHECK(j["attempts"][0]["verdict"] == "accepted");
}

TEST_CASE("auto proof well-formedness") {
    claims::AutoProof obvious;
    CHECK(claims::auto_proof_well_formed(obvious));

    claims::AutoProof by;
    by.kind = claims::AutoProof::Kind::ByDef;
    CHECK_FALSE(claims::auto_proof_well_formed(by));  // both lists empty
    by.defs = {"Odd", "Divides"};
    CHECK(claims::auto_proof_well_formed(by));
    by.defs = {"Odd", "Odd"};
    CHECK_FALSE(claims::auto_proof_well_formed(by));  // duplicates
}
