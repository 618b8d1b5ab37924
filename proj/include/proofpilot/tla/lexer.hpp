#pragma once

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace proofpilot::tla {

// Malformed input. The formatted message is used verbatim as LLM feedback in
// the direct-generation loop, so it carries position and expectation.
class SyntaxError : public std::runtime_error {
public:
    SyntaxError(int line, int col, const std::string& expected)
        : std::runtime_error("TLA+ syntax error at line " + std::to_string(line) + ", column " +
                             std::to_string(col) + ": " + expected),
          line_(line),
          col_(col),
          expected_(expected) {}

    int line() const { return line_; }
    int col() const { return col_; }
    const std::string& expected() const { return expected_; }

private:
    int line_;
    int col_;
    std::string expected_;
};

enum class TokenKind {
    Ident,
    Number,
    Op,          // operators and punctuation, text holds the symbol
    ModuleDash,  // run of 4+ '-'
    ModuleEnd,   // run of 4+ '='
    DefEq,       // ==
    StepMarker,  // <n> or <n>label proof step marker
    Comment,     // (* ... *) or \* ...
    End,
};

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    int line = 1;
    int col = 1;
    size_t offset = 0;           // byte offset in the module text
    bool at_line_start = false;  // first token on its line
};

// Lexer position, restorable so the parser can re-scan opaque proof spans.
struct LexState {
    size_t pos = 0;
    int line = 1;
    int col = 1;
    bool line_start = true;
};

namespace detail {

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace detail

// Tokenizes newline-normalized module text. Only ASCII input is accepted;
// the offending token is quoted so the message can be fed back to an LLM.
class Lexer {
public:
    explicit Lexer(std::string_view text, LexState st = {}) : text_(text), st_(st) {}

    std::string_view text() const { return text_; }
    const LexState& state() const { return st_; }
    void reset(const LexState& st) { st_ = st; }

    Token next() {
        skip_spaces();
        if (st_.pos >= text_.size())
            return Token{TokenKind::End, "", st_.line, st_.col, st_.pos, st_.line_start};
        Token t = next_token();
        return t;
    }

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            Token t = next();
            bool end = t.kind == TokenKind::End;
            out.push_back(std::move(t));
            if (end) break;
        }
        return out;
    }

private:
    void skip_spaces() {
        while (st_.pos < text_.size()) {
            char c = text_[st_.pos];
            if (c == '\n') {
                advance();
                st_.line_start = true;
            } else if (c == ' ' || c == '\t') {
                advance();
            } else {
                break;
            }
        }
    }

    Token next_token() {
        const char c = text_[st_.pos];
        const int line = st_.line, col = st_.col;
        const size_t off = st_.pos;
        const bool at_start = st_.line_start;
        st_.line_start = false;

        auto tok = [&](TokenKind kind, std::string text) {
            return Token{kind, std::move(text), line, col, off, at_start};
        };

        if (static_cast<unsigned char>(c) >= 0x80)
            throw SyntaxError(line, col, "non-ASCII character '" + utf8_cluster() + "'");

        if (detail::ident_start(c)) {
            size_t start = st_.pos;
            while (st_.pos < text_.size() && detail::ident_char(text_[st_.pos])) advance();
            return tok(TokenKind::Ident, std::string(text_.substr(start, st_.pos - start)));
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = st_.pos;
            while (st_.pos < text_.size() && std::isdigit(static_cast<unsigned char>(text_[st_.pos])))
                advance();
            return tok(TokenKind::Number, std::string(text_.substr(start, st_.pos - start)));
        }

        switch (c) {
            case '-': {
                size_t n = run_length('-');
                if (n >= 4) return tok(TokenKind::ModuleDash, take_run(n));
                if (n != 1) throw SyntaxError(line, col, "'-' or a module header dash run");
                advance();
                return tok(TokenKind::Op, "-");
            }
            case '=': {
                if (peek(1) == '>') return tok(TokenKind::Op, take(2));
                size_t n = run_length('=');
                if (n >= 4) return tok(TokenKind::ModuleEnd, take_run(n));
                if (n == 2) return tok(TokenKind::DefEq, take(2));
                return tok(TokenKind::Op, take(1));
            }
            case '<': {
                if (peek(1) == '=' && peek(2) == '>') return tok(TokenKind::Op, take(3));
                if (peek(1) == '=') return tok(TokenKind::Op, take(2));
                if (std::isdigit(static_cast<unsigned char>(peek(1)))) return lex_step_marker(tok);
                return tok(TokenKind::Op, take(1));
            }
            case '>':
                if (peek(1) == '=') return tok(TokenKind::Op, take(2));
                return tok(TokenKind::Op, take(1));
            case '/':
                if (peek(1) == '\\') return tok(TokenKind::Op, take(2));
                if (peek(1) == '=') return tok(TokenKind::Op, take(2));
                throw SyntaxError(line, col, "'/\\' or '/='");
            case '\\':
                if (peek(1) == '/') return tok(TokenKind::Op, take(2));
                if (peek(1) == '*') return lex_line_comment(tok);
                if (detail::ident_start(peek(1))) return lex_backslash_word(tok, line, col);
                return tok(TokenKind::Op, take(1));  // set difference
            case '(':
                if (peek(1) == '*') return lex_block_comment(tok, line, col);
                return tok(TokenKind::Op, take(1));
            case ')':
            case '{':
            case '}':
            case ',':
            case ':':
            case '+':
            case '*':
            case '%':
            case '~':
            case '#':
            case '.':
            case '!':
                return tok(TokenKind::Op, take(1));
            default:
                throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
        }
    }

    template <typename MakeTok>
    Token lex_backslash_word(MakeTok&& tok, int line, int col) {
        size_t start = st_.pos;
        advance();  // backslash
        while (st_.pos < text_.size() && detail::ident_char(text_[st_.pos])) advance();
        std::string word(text_.substr(start, st_.pos - start));
        if (word == "\\A" || word == "\\E" || word == "\\in")
            return tok(TokenKind::Op, std::move(word));
        throw SyntaxError(line, col, "unsupported operator '" + word + "'");
    }

    // <1>, <1>2, <1>a : proof step markers, only meaningful in opaque spans
    template <typename MakeTok>
    Token lex_step_marker(MakeTok&& tok) {
        size_t start = st_.pos;
        advance();  // <
        while (st_.pos < text_.size() && std::isdigit(static_cast<unsigned char>(text_[st_.pos])))
            advance();
        if (st_.pos >= text_.size() || text_[st_.pos] != '>')
            throw SyntaxError(st_.line, st_.col, "proof step marker of the form <n>");
        advance();  // >
        while (st_.pos < text_.size() && detail::ident_char(text_[st_.pos])) advance();
        return tok(TokenKind::StepMarker, std::string(text_.substr(start, st_.pos - start)));
    }

    template <typename MakeTok>
    Token lex_line_comment(MakeTok&& tok) {
        size_t start = st_.pos;
        while (st_.pos < text_.size() && text_[st_.pos] != '\n') advance();
        return tok(TokenKind::Comment, std::string(text_.substr(start, st_.pos - start)));
    }

    template <typename MakeTok>
    Token lex_block_comment(MakeTok&& tok, int line, int col) {
        size_t start = st_.pos;
        advance();
        advance();
        int depth = 1;
        while (st_.pos < text_.size() && depth > 0) {
            if (text_[st_.pos] == '(' && peek(1) == '*') {
                ++depth;
                advance();
                advance();
            } else if (text_[st_.pos] == '*' && peek(1) == ')') {
                --depth;
                advance();
                advance();
            } else {
                advance();
            }
        }
        if (depth > 0) throw SyntaxError(line, col, "unterminated comment");
        return tok(TokenKind::Comment, std::string(text_.substr(start, st_.pos - start)));
    }

    std::string take(size_t n) {
        std::string s(text_.substr(st_.pos, n));
        for (size_t i = 0; i < n; ++i) advance();
        return s;
    }

    std::string take_run(size_t n) { return take(n); }

    size_t run_length(char c) const {
        size_t n = 0;
        while (st_.pos + n < text_.size() && text_[st_.pos + n] == c) ++n;
        return n;
    }

    char peek(size_t ahead) const {
        return st_.pos + ahead < text_.size() ? text_[st_.pos + ahead] : '\0';
    }

    std::string utf8_cluster() const {
        size_t n = 1;
        while (st_.pos + n < text_.size() &&
               (static_cast<unsigned char>(text_[st_.pos + n]) & 0xC0) == 0x80)
            ++n;
        return std::string(text_.substr(st_.pos, n));
    }

    void advance() {
        if (text_[st_.pos] == '\n') {
            ++st_.line;
            st_.col = 1;
        } else {
            ++st_.col;
        }
        ++st_.pos;
    }

    std::string_view text_;
    LexState st_;
};

}  // namespace proofpilot::tla
