#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "proofpilot/tla/parser.hpp"
#include "proofpilot/tla/printer.hpp"
#include "proofpilot/tla/symbols.hpp"
#include "support/generators.hpp"

using namespace proofpilot;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string data_path(const std::string& name) {
    return std::string(PROOFPILOT_TEST_DATA_DIR) + "/" + name;
}

// independent oracle: naive recursive walk, first-occurrence order
void oracle_walk(const tla::ExprPtr& e, std::vector<std::string>& out) {
    if (e->kind == tla::ExprKind::Ident || e->kind == tla::ExprKind::Apply) {
        if (!tla::is_builtin_symbol(e->text) &&
            std::find(out.begin(), out.end(), e->text) == out.end())
            out.push_back(e->text);
    }
    for (const auto& c : e->children) oracle_walk(c, out);
}

}  // namespace

TEST_CASE("empty module parses and renders exactly") {
    tla::TlaModule m = tla::parse_module("---- MODULE M ----\n====");
    CHECK(m.name == "M");
    CHECK(m.units.empty());
    CHECK(m.extends.empty());
    CHECK(tla::render_module(m) == "---- MODULE M ----\n====\n");
}

TEST_CASE("quadratic example module has one unproved theorem") {
    tla::TlaModule m = tla::parse_module(read_file(data_path("quadratic.tla")));
    CHECK(m.name == "quadratic");
    REQUIRE(m.extends == std::vector<std::string>{"Integers"});
    auto unproved = tla::unproved_theorems(m);
    REQUIRE(unproved.size() == 1);
    CHECK(*unproved.front()->name == "Main");
    CHECK_FALSE(unproved.front()->statement.is_assume_prove());
}

TEST_CASE("appendix number-theory module: unit census") {
    // frozen by hand-count against the listing: three theorems, the first two
    // proved OBVIOUS, the goal proved BY the other two
    tla::TlaModule m = tla::parse_module(read_file(data_path("proved/mathd_numbertheory_234.tla")));
    std::vector<const tla::Theorem*> thms;
    for (const auto& u : m.units)
        if (const auto* t = std::get_if<tla::Theorem>(&u)) thms.push_back(t);
    REQUIRE(thms.size() == 3);
    CHECK(*thms[0]->name == "Cube_Implies_N97_1");
    CHECK(*thms[1]->name == "N97_Implies_Sum16_2");
    CHECK(*thms[2]->name == "mathd_numbertheory_234");
    REQUIRE(thms[0]->proof);
    REQUIRE(thms[1]->proof);
    REQUIRE(thms[2]->proof);
    CHECK(thms[0]->proof->kind == tla::ProofKind::Obvious);
    CHECK(thms[1]->proof->kind == tla::ProofKind::Obvious);
    CHECK(thms[2]->proof->kind == tla::ProofKind::By);
    CHECK(thms[2]->proof->facts ==
          std::vector<std::string>{"Cube_Implies_N97_1", "N97_Implies_Sum16_2"});
    CHECK(tla::unproved_theorems(m).empty());
}

TEST_CASE("all bundled example modules round-trip") {
    for (const char* name :
         {"quadratic.tla", "exercise_1_27.tla", "exercise_18_4.tla",
          "proved/mathd_numbertheory_234.tla", "proved/amc12a_2002_p6.tla",
          "proved/exercise_1_1_4.tla", "proved/amc12_2000_p12.tla"}) {
        INFO(name);
        tla::TlaModule m = tla::parse_module(read_file(data_path(name)));
        tla::TlaModule again = tla::parse_module(tla::render_module(m));
        CHECK(tla::module_equal(m, again));
    }
}

TEST_CASE("theorem spans cover statement and proof lines") {
    tla::TlaModule m = tla::parse_module(read_file(data_path("exercise_1_27.tla")));
    const tla::Theorem* t = tla::find_theorem(m, "exercise_1_27");
    REQUIRE(t != nullptr);
    CHECK(t->line_begin == 7);
    CHECK(t->line_end == 9);
}

TEST_CASE("referenced_symbols worked examples") {
    auto cube = tla::parse_expression("Cube(x) + Cube(y) = 1729");
    CHECK(tla::referenced_symbols(cube) == std::vector<std::string>{"Cube", "x", "y"});

    auto trivial = tla::parse_expression("1 + 1 = 2");
    CHECK(tla::referenced_symbols(trivial).empty());
}

TEST_CASE("referenced_symbols matches a hand-built oracle on Divides") {
    // hand-built tree for Divides(8, n*n - 1)
    auto expr = tla::make_apply(
        "Divides",
        {tla::make_number(8),
         tla::make_binary("-",
                          tla::make_binary("*", tla::make_ident("n"), tla::make_ident("n")),
                          tla::make_number(1))});
    std::vector<std::string> expected;
    oracle_walk(expr, expected);
    CHECK(expected == std::vector<std::string>{"Divides", "n"});
    CHECK(tla::referenced_symbols(expr) == expected);

    auto parsed = tla::parse_expression("Divides(8, n*n - 1)");
    CHECK(tla::expr_equal(parsed, expr));
    CHECK(tla::referenced_symbols(parsed) == expected);
}

TEST_CASE("referenced_symbols is closed under subexpressions") {
    testgen::Gen g(20240817);
    for (int i = 0; i < 200; ++i) {
        auto e = testgen::gen_expr(g, {"x", "y"}, {"F", "G"}, 4);
        auto parent = tla::referenced_symbols(e);
        std::set<std::string> parent_set(parent.begin(), parent.end());
        for (const auto& child : e->children) {
            for (const auto& sym : tla::referenced_symbols(child)) {
                INFO("missing " << sym);
                CHECK(parent_set.count(sym) == 1);
            }
        }
    }
}

TEST_CASE("free_symbols respects quantifier binders and NEW declarations") {
    auto e = tla::parse_expression("\\A n \\in Nat : Odd(n) => Divides(8, n * n - 1)");
    CHECK(tla::free_symbols(e) == std::vector<std::string>{"Odd", "Divides"});
    CHECK(tla::referenced_symbols(e) == std::vector<std::string>{"Odd", "n", "Divides"});

    tla::ClaimStatement ap = tla::make_assume_prove(
        {tla::NewDecl{"x", tla::make_ident("Nat")},
         tla::AssumeItem(tla::parse_expression("x > k"))},
        tla::parse_expression("x + k > 0"));
    CHECK(tla::claim_free_symbols(ap) == std::vector<std::string>{"k"});
}

TEST_CASE("random modules round-trip through render and parse") {
    testgen::Gen g(424242);
    for (int i = 0; i < 250; ++i) {
        tla::TlaModule m = testgen::gen_module(g);
        std::string text = tla::render_module(m);
        INFO(text);
        tla::TlaModule again = tla::parse_module(text);
        CHECK(tla::module_equal(m, again));
    }
}

TEST_CASE("line endings normalize to LF") {
    tla::TlaModule m =
        tla::parse_module("---- MODULE M ----\r\nEXTENDS Integers\r\nTHEOREM T == 1 = 1\r\n====\r\n");
    CHECK(m.extends == std::vector<std::string>{"Integers"});
    CHECK(m.source.find('\r') == std::string::npos);
    CHECK(tla::find_theorem(m, "T") != nullptr);
}

TEST_CASE("assume-prove statements parse with rich domains") {
    tla::TlaModule m = tla::parse_module(
        "---- MODULE M ----\n"
        "THEOREM X ==\n"
        "ASSUME NEW n \\in Nat \\ {0}, n > 1\n"
        "PROVE n >= 2\n"
        "OBVIOUS\n"
        "====\n");
    const tla::Theorem* t = tla::find_theorem(m, "X");
    REQUIRE(t != nullptr);
    REQUIRE(t->statement.is_assume_prove());
    const auto& ap = t->statement.assume_prove();
    REQUIRE(ap.assumptions.size() == 2);
    const auto* decl = std::get_if<tla::NewDecl>(&ap.assumptions[0]);
    REQUIRE(decl != nullptr);
    CHECK(decl->var == "n");
    CHECK(tla::render_expr(decl->domain) == "Nat \\ {0}");
}

TEST_CASE("opaque proofs are preserved verbatim") {
    std::string text =
        "---- MODULE M ----\n"
        "THEOREM T == \\A x \\in Nat : x + 0 = x\n"
        "<1> SUFFICES ASSUME NEW x \\in Nat\n"
        "           PROVE  x + 0 = x\n"
        "  OBVIOUS\n"
        "<1>1 x + 0 = x BY SMT\n"
        "<1> QED BY <1>1\n"
        "====\n";
    tla::TlaModule m = tla::parse_module(text);
    const tla::Theorem* t = tla::find_theorem(m, "T");
    REQUIRE(t != nullptr);
    REQUIRE(t->proof);
    CHECK(t->proof->kind == tla::ProofKind::Opaque);
    CHECK(t->proof->opaque_text ==
          "<1> SUFFICES ASSUME NEW x \\in Nat\n"
          "           PROVE  x + 0 = x\n"
          "  OBVIOUS\n"
          "<1>1 x + 0 = x BY SMT\n"
          "<1> QED BY <1>1");
    tla::TlaModule again = tla::parse_module(tla::render_module(m));
    CHECK(tla::module_equal(m, again));
}

TEST_CASE("opaque proof capture stops at the next unit") {
    std::string text =
        "---- MODULE M ----\n"
        "THEOREM T == 1 = 1\n"
        "<1> QED OBVIOUS\n"
        "THEOREM S == 2 = 2\n"
        "OBVIOUS\n"
        "====\n";
    tla::TlaModule m = tla::parse_module(text);
    const tla::Theorem* t = tla::find_theorem(m, "T");
    REQUIRE(t != nullptr);
    CHECK(t->proof->kind == tla::ProofKind::Opaque);
    CHECK(t->proof->opaque_text == "<1> QED OBVIOUS");
    const tla::Theorem* s = tla::find_theorem(m, "S");
    REQUIRE(s != nullptr);
    CHECK(s->proof->kind == tla::ProofKind::Obvious);
}

TEST_CASE("constructs outside the language are rejected") {
    SECTION("FIX keyword") {
        std::string text =
            "---- MODULE M ----\n"
            "THEOREM T == 1 = 1\n"
            "PROOF\n"
            "<1>1. FIX n \\in Nat\n"
            "<1>2. QED\n"
            "====\n";
        CHECK_THROWS_WITH(tla::parse_module(text), Catch::Matchers::ContainsSubstring("FIX"));
    }
    SECTION("INT_ARITH") {
        std::string text =
            "---- MODULE M ----\n"
            "THEOREM T == 1 = 1\n"
            "PROOF\n"
            "<1>1 HAVE 1 = 1 BY INT_ARITH\n"
            "<1>2 QED\n"
            "====\n";
        CHECK_THROWS_WITH(tla::parse_module(text),
                          Catch::Matchers::ContainsSubstring("INT_ARITH"));
    }
    SECTION("trailing period on a proof step") {
        std::string text =
            "---- MODULE M ----\n"
            "THEOREM T == 1 = 1\n"
            "PROOF\n"
            "<1>1 TAKE m = n + 1.\n"
            "<1>2 QED\n"
            "====\n";
        CHECK_THROWS_WITH(tla::parse_module(text),
                          Catch::Matchers::ContainsSubstring("'.'"));
    }
    SECTION("non-ASCII input quotes the offending token") {
        try {
            tla::parse_expression("\xE2\x88\x80 x : x = x");
            FAIL("expected SyntaxError");
        } catch (const tla::SyntaxError& e) {
            CHECK(std::string(e.what()).find("non-ASCII") != std::string::npos);
            CHECK(std::string(e.what()).find("\xE2\x88\x80") != std::string::npos);
        }
    }
}

TEST_CASE("malformed expressions raise positioned syntax errors") {
    SECTION("mixed conjunction and disjunction") {
        CHECK_THROWS_WITH(tla::parse_expression("A /\\ B \\/ C"),
                          Catch::Matchers::ContainsSubstring("mix"));
    }
    SECTION("chained comparison") {
        CHECK_THROWS_WITH(tla::parse_expression("a = b = c"),
                          Catch::Matchers::ContainsSubstring("chained comparison"));
    }
    SECTION("duplicate definition") {
        CHECK_THROWS_WITH(
            tla::parse_module("---- MODULE M ----\nFoo == 1\nFoo == 2\n====\n"),
            Catch::Matchers::ContainsSubstring("duplicate"));
    }
    SECTION("positions are 1-based") {
        try {
            tla::parse_module("---- MODULE M ----\nTHEOREM T == (1 + \n====\n");
            FAIL("expected SyntaxError");
        } catch (const tla::SyntaxError& e) {
            CHECK(e.line() >= 2);
            CHECK(e.col() >= 1);
        }
    }
    SECTION("missing terminator") {
        CHECK_THROWS_WITH(tla::parse_module("---- MODULE M ----\nTHEOREM T == 1 = 1\n"),
                          Catch::Matchers::ContainsSubstring("===="));
    }
}

TEST_CASE("comments survive in source but not in semantics") {
    std::string text =
        "---- MODULE M ----\n"
        "(* block comment *)\n"
        "Foo == 1\n"
        "\\* line comment\n"
        "THEOREM T == Foo = 1\n"
        "OBVIOUS\n"
        "====\n";
    tla::TlaModule m = tla::parse_module(text);
    int comments = 0;
    for (const auto& u : m.units) comments += std::holds_alternative<tla::Comment>(u);
    CHECK(comments == 2);
    CHECK(m.source.find("block comment") != std::string::npos);

    tla::TlaModule no_comments = tla::parse_module(
        "---- MODULE M ----\nFoo == 1\nTHEOREM T == Foo = 1\nOBVIOUS\n====\n");
    CHECK(tla::module_equal(m, no_comments));
}

TEST_CASE("rendering normalizes the inequality alias") {
    auto e = tla::parse_expression("x # z");
    CHECK(e->text == "/=");
    CHECK(tla::render_expr(e) == "x /= z");
}

TEST_CASE("BY DEF proofs parse with and without facts") {
    tla::TlaModule m = tla::parse_module(
        "---- MODULE M ----\n"
        "Odd(n) == n % 2 = 1\n"
        "THEOREM T == \\A n \\in Nat : Odd(n) \\/ ~Odd(n)\n"
        "BY DEF Odd\n"
        "THEOREM S == 1 = 1\n"
        "BY T DEF Odd\n"
        "====\n");
    const tla::Theorem* t = tla::find_theorem(m, "T");
    REQUIRE((t && t->proof));
    CHECK(t->proof->facts.empty());
    CHECK(t->proof->defs == std::vector<std::string>{"Odd"});
    const tla::Theorem* s = tla::find_theorem(m, "S");
    REQUIRE((s && s->proof));
    CHECK(s->proof->facts == std::vector<std::string>{"T"});
    CHECK(s->proof->defs == std::vector<std::string>{"Odd"});
}
