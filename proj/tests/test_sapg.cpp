#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "proofpilot/sapg/sapg.hpp"
#include "proofpilot/tla/printer.hpp"

using namespace proofpilot;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

claims::ProofObligation exercise_1_27_obligation() {
    tla::TlaModule m = tla::parse_module(
        read_file(std::string(PROOFPILOT_TEST_DATA_DIR) + "/exercise_1_27.tla"));
    return claims::obligation_for_theorem(m, "exercise_1_27");
}

}  // namespace

TEST_CASE("definitions_to_unfold finds directly referenced definitions") {
    tla::TlaModule m = tla::parse_module(
        "---- MODULE M ----\nEXTENDS Integers\n"
        "Cube(x) == x * x * x\n"
        "THEOREM T == \\A x \\in Int : Cube(x) >= 0 \\/ Cube(x) < 0\n====\n");
    auto ob = claims::obligation_for_theorem(m, "T");
    CHECK(sapg::definitions_to_unfold(ob) == std::vector<std::string>{"Cube"});
}

TEST_CASE("definitions_to_unfold is empty for builtin-only goals") {
    tla::TlaModule m = tla::parse_module(
        "---- MODULE M ----\nEXTENDS Integers\n"
        "Unused == 41\n"
        "THEOREM T == 1 + 1 = 2\n====\n");
    auto ob = claims::obligation_for_theorem(m, "T");
    CHECK(sapg::definitions_to_unfold(ob).empty());
}

TEST_CASE("definitions_to_unfold on the odd-divisibility module") {
    // hand-derived closure: the goal mentions Odd then Divides, neither body
    // pulls in anything further
    auto ob = exercise_1_27_obligation();
    CHECK(sapg::definitions_to_unfold(ob) == std::vector<std::string>{"Odd", "Divides"});
}

TEST_CASE("definitions_to_unfold follows definition bodies transitively") {
    tla::TlaModule m = tla::parse_module(
        "---- MODULE M ----\nEXTENDS Integers\n"
        "Square(x) == x * x\n"
        "Quad(x) == Square(Square(x))\n"
        "THEOREM T == \\A x \\in Int : Quad(x) >= 0\n====\n");
    auto ob = claims::obligation_for_theorem(m, "T");
    CHECK(sapg::definitions_to_unfold(ob) == std::vector<std::string>{"Quad", "Square"});
}

TEST_CASE("unknown goal symbols raise UnknownSymbol") {
    tla::TlaModule m = tla::parse_module(
        "---- MODULE M ----\nEXTENDS Integers\nTHEOREM T == Mystery(1) = 1\n====\n");
    auto ob = claims::obligation_for_theorem(m, "T");
    try {
        sapg::definitions_to_unfold(ob);
        FAIL("expected UnknownSymbol");
    } catch (const sapg::UnknownSymbol& e) {
        CHECK(e.name() == "Mystery");
    }
}

TEST_CASE("generate_auto_proof returns OBVIOUS with nothing to cite or unfold") {
    // sub-claim obligation shape: bare context, arithmetic-only goal
    tla::TlaModule m = tla::parse_module(
        "---- MODULE quadratic ----\nEXTENDS Integers\n"
        "THEOREM FactorForm ==\n"
        "ASSUME NEW x \\in Int, x * x - 5 * x + 6 = 0\n"
        "PROVE (x - 2) * (x - 3) = 0\n====\n");
    auto ob = claims::obligation_for_theorem(m, "FactorForm");
    auto plan = sapg::generate_auto_proof(ob);
    CHECK(plan.proof.kind == claims::AutoProof::Kind::Obvious);
    CHECK(plan.unfolded.empty());
    CHECK(plan.cited.empty());
    CHECK(tla::render_proof(claims::to_tla_proof(plan.proof)) == "OBVIOUS");
}

TEST_CASE("generate_auto_proof unfolds the goal's definition closure") {
    auto ob = exercise_1_27_obligation();
    auto plan = sapg::generate_auto_proof(ob);
    CHECK(plan.proof.kind == claims::AutoProof::Kind::ByDef);
    CHECK(plan.unfolded == std::vector<std::string>{"Odd", "Divides"});
    CHECK(plan.cited.empty());
    CHECK(tla::render_proof(claims::to_tla_proof(plan.proof)) == "BY DEF Odd, Divides");
}

TEST_CASE("generate_auto_proof cites named facts in scope") {
    tla::TlaModule m = tla::parse_module(
        "---- MODULE M ----\nEXTENDS Integers\n"
        "THEOREM F == \\A n \\in Nat : n + 0 = n\nOBVIOUS\n"
        "THEOREM T == \\A n \\in Nat : n + 0 = n\n====\n");
    auto ob = claims::obligation_for_theorem(m, "T");
    auto plan = sapg::generate_auto_proof(ob);
    CHECK(plan.proof.kind == claims::AutoProof::Kind::ByDef);
    CHECK(plan.proof.facts == std::vector<std::string>{"F"});
    CHECK(plan.proof.defs.empty());
    CHECK(tla::render_proof(claims::to_tla_proof(plan.proof)) == "BY F");
}

TEST_CASE("auto proof plans are deterministic and cite only context names") {
    auto ob = exercise_1_27_obligation();
    auto plan1 = sapg::generate_auto_proof(ob);
    auto plan2 = sapg::generate_auto_proof(ob);
    CHECK(plan1.unfolded == plan2.unfolded);
    CHECK(plan1.cited == plan2.cited);
    CHECK(plan1.proof.kind == plan2.proof.kind);

    auto names = claims::context_symbol_names(ob);
    for (const auto& d : plan1.proof.defs) CHECK(names.count(d) == 1);
    for (const auto& f : plan1.proof.facts) CHECK(names.count(f) == 1);
    CHECK(claims::auto_proof_well_formed(plan1.proof));
}

TEST_CASE("decomposition defs cover parent and sub-claim symbols, parent first") {
    tla::TlaModule m = tla::parse_module(
        read_file(std::string(PROOFPILOT_TEST_DATA_DIR) + "/exercise_18_4.tla"));
    auto ob = claims::obligation_for_theorem(m, "exercise_18_4");

    tla::Theorem l1;
    l1.name = "L1";
    l1.statement = tla::make_plain_claim(tla::parse_expression(
        "\\E x, y \\in Int : Cube(x) + Cube(y) = 1729"));
    CHECK(sapg::decomposition_defs(ob, {l1}) == std::vector<std::string>{"Cube"});

    tla::Theorem no_defs;
    no_defs.name = "L2";
    no_defs.statement = tla::make_plain_claim(tla::parse_expression("1 = 1"));
    auto ob2 = claims::obligation_for_theorem(
        tla::parse_module("---- MODULE M ----\nTHEOREM G == 2 = 2\n====\n"), "G");
    CHECK(sapg::decomposition_defs(ob2, {no_defs}).empty());
}
