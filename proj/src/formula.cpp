#include "ssrisk/formula.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>

namespace ssrisk::formula {

namespace {

bool is_ident_start(char c) {
    return std::isalpha((unsigned char)c) || c == '_' || c == '\\';
}
bool is_ident_char(char c) {
    return std::isalnum((unsigned char)c) || c == '_' || c == '.' || c == '\\';
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper((unsigned char)c));
    return out;
}

[[noreturn]] void lex_fail(std::size_t offset, const std::string& why) {
    throw Error(errc::lex_error, "offset " + std::to_string(offset) + ": " + why);
}

// "$AB$12" / "AB12" with Excel's column and row bounds.
bool is_cell_ref_text(std::string_view s) {
    size_t i = 0;
    if (i < s.size() && s[i] == '$') ++i;
    size_t col_start = i;
    while (i < s.size() && std::isalpha((unsigned char)s[i])) ++i;
    size_t col_len = i - col_start;
    if (col_len < 1 || col_len > 3) return false;
    std::uint32_t col = 0;
    for (size_t k = col_start; k < col_start + col_len; ++k)
        col = col * 26 + static_cast<std::uint32_t>(std::toupper((unsigned char)s[k]) - 'A' + 1);
    if (col > 16384) return false;
    if (i < s.size() && s[i] == '$') ++i;
    size_t row_start = i;
    while (i < s.size() && std::isdigit((unsigned char)s[i])) ++i;
    if (i != s.size() || i == row_start) return false;
    if (i - row_start > 7) return false;
    std::uint64_t row = 0;
    for (size_t k = row_start; k < i; ++k) row = row * 10 + (s[k] - '0');
    return row >= 1 && row <= 1048576;
}

const char* const kErrorLiterals[] = {"#NULL!", "#DIV/0!", "#VALUE!", "#REF!",
                                      "#NAME?", "#NUM!",   "#N/A"};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_ws();
            if (pos_ >= text_.size()) break;
            out.push_back(next());
        }
        return out;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }
    void skip_ws() {
        while (pos_ < text_.size() &&
               (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                text_[pos_] == '\r'))
            ++pos_;
    }

    Token simple(Token::Kind kind, std::string text) {
        Token t{kind, std::move(text), pos_, std::nullopt, std::nullopt};
        pos_ += t.text.size();
        return t;
    }

    Token next() {
        char c = peek();
        std::size_t start = pos_;
        switch (c) {
            case '(': return simple(Token::Kind::lparen, "(");
            case ')': return simple(Token::Kind::rparen, ")");
            case '{': return simple(Token::Kind::lbrace, "{");
            case '}': return simple(Token::Kind::rbrace, "}");
            case ',': return simple(Token::Kind::comma, ",");
            case ';': return simple(Token::Kind::semicolon, ";");
            case ':': return simple(Token::Kind::colon, ":");
            case '+': case '-': case '*': case '/': case '^': case '&': case '%':
            case '=':
                return simple(Token::Kind::op, std::string(1, c));
            case '<':
                if (peek(1) == '>') return simple(Token::Kind::op, "<>");
                if (peek(1) == '=') return simple(Token::Kind::op, "<=");
                return simple(Token::Kind::op, "<");
            case '>':
                if (peek(1) == '=') return simple(Token::Kind::op, ">=");
                return simple(Token::Kind::op, ">");
            case '"': return lex_string();
            case '#': return lex_error_literal();
            case '\'': return lex_qualified(start, std::nullopt);
            case '[': return lex_bracket(start);
            default: break;
        }
        if (std::isdigit((unsigned char)c) || (c == '.' && std::isdigit((unsigned char)peek(1))))
            return lex_number();
        if (c == '$' || is_ident_start(c)) return lex_word(start, std::nullopt);
        lex_fail(pos_, "unexpected byte 0x" + [&] {
            char buf[3];
            std::snprintf(buf, sizeof buf, "%02X", (unsigned char)c);
            return std::string(buf);
        }());
    }

    Token lex_string() {
        std::size_t start = pos_;
        ++pos_;  // opening quote
        std::string value;
        while (true) {
            if (pos_ >= text_.size()) lex_fail(start, "unterminated string");
            char c = text_[pos_];
            if (c == '"') {
                if (peek(1) == '"') {  // doubled quote
                    value += '"';
                    pos_ += 2;
                    continue;
                }
                ++pos_;
                break;
            }
            value += c;
            ++pos_;
        }
        return Token{Token::Kind::string, std::move(value), start, std::nullopt,
                     std::nullopt};
    }

    Token lex_error_literal() {
        std::size_t start = pos_;
        for (const char* lit : kErrorLiterals) {
            std::size_t len = std::strlen(lit);
            if (pos_ + len <= text_.size()) {
                bool match = true;
                for (std::size_t k = 0; k < len; ++k) {
                    if (std::toupper((unsigned char)text_[pos_ + k]) != lit[k]) {
                        match = false;
                        break;
                    }
                }
                if (match) {
                    pos_ += len;
                    return Token{Token::Kind::error_lit, lit, start, std::nullopt,
                                 std::nullopt};
                }
            }
        }
        lex_fail(start, "unknown error literal");
    }

    Token lex_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit((unsigned char)text_[pos_])) ++pos_;
        if (peek() == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit((unsigned char)text_[pos_])) ++pos_;
        }
        if (peek() == 'e' || peek() == 'E') {
            std::size_t save = pos_;
            ++pos_;
            if (peek() == '+' || peek() == '-') ++pos_;
            if (std::isdigit((unsigned char)peek())) {
                while (pos_ < text_.size() && std::isdigit((unsigned char)text_[pos_]))
                    ++pos_;
            } else {
                pos_ = save;  // the 'e' belongs to an identifier-ish neighbor
            }
        }
        return Token{Token::Kind::number, std::string(text_.substr(start, pos_ - start)),
                     start, std::nullopt, std::nullopt};
    }

    // '...' quoted sheet name; must be followed by '!' and a body.
    Token lex_qualified(std::size_t start, std::optional<int> ext) {
        ++pos_;  // opening quote
        std::string sheet;
        while (true) {
            if (pos_ >= text_.size()) lex_fail(start, "unterminated sheet name");
            char c = text_[pos_];
            if (c == '\'') {
                if (peek(1) == '\'') {
                    sheet += '\'';
                    pos_ += 2;
                    continue;
                }
                ++pos_;
                break;
            }
            sheet += c;
            ++pos_;
        }
        if (peek() != '!') lex_fail(start, "quoted name without '!'");
        ++pos_;
        return lex_body(start, ext, sheet);
    }

    // '[' — an external workbook index "[3]" or an opaque structured blob.
    Token lex_bracket(std::size_t start) {
        std::size_t i = pos_ + 1;
        std::string digits;
        while (i < text_.size() && std::isdigit((unsigned char)text_[i])) {
            digits += text_[i];
            ++i;
        }
        if (!digits.empty() && i < text_.size() && text_[i] == ']' && digits.size() <= 6) {
            pos_ = i + 1;
            int idx = std::atoi(digits.c_str());
            // external prefix must introduce a sheet-qualified ref or name
            if (peek() == '\'') return lex_qualified(start, idx);
            if (peek() == '!') {  // "[1]!Name" — workbook-scoped name
                ++pos_;
                return lex_body(start, idx, std::nullopt);
            }
            if (is_ident_start(peek()) || peek() == '$') return lex_word(start, idx);
            lex_fail(start, "dangling external prefix");
        }
        // structured shorthand like "[@Column]": swallow balanced brackets
        return swallow_structured(start, "");
    }

    // Balanced-bracket swallow for structured references; the whole blob
    // becomes one opaque ident token.
    Token swallow_structured(std::size_t start, std::string prefix) {
        std::string blob = std::move(prefix);
        int depth = 0;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            blob += c;
            ++pos_;
            if (c == '[') ++depth;
            if (c == ']') {
                --depth;
                if (depth == 0)
                    return Token{Token::Kind::ident, std::move(blob), start, std::nullopt,
                                 std::nullopt};
            }
        }
        lex_fail(start, "unbalanced '['");
    }

    // Identifier-or-ref starting at an ident char or '$'; `ext` carries an
    // already-lexed external index.
    Token lex_word(std::size_t start, std::optional<int> ext) {
        std::size_t i = pos_;
        if (text_[i] == '$' || is_ident_start(text_[i])) {
            std::size_t j = i;
            while (j < text_.size() && (is_ident_char(text_[j]) || text_[j] == '$')) ++j;
            // sheet qualifier?
            if (j < text_.size() && text_[j] == '!') {
                std::string sheet(text_.substr(i, j - i));
                pos_ = j + 1;
                return lex_body(start, ext, sheet);
            }
        }
        return lex_body(start, ext, std::nullopt);
    }

    // The reference/name body after any qualifiers.
    Token lex_body(std::size_t start, std::optional<int> ext,
                   std::optional<std::string> sheet) {
        if (pos_ >= text_.size()) lex_fail(start, "qualifier without a reference");
        std::size_t i = pos_;
        if (text_[i] != '$' && !is_ident_start(text_[i]))
            lex_fail(pos_, "expected a reference or name");
        std::size_t j = i;
        while (j < text_.size() && (is_ident_char(text_[j]) || text_[j] == '$')) ++j;
        std::string body(text_.substr(i, j - i));
        pos_ = j;
        // structured reference directly on a name: swallow as opaque
        if (peek() == '[' && !ext && !sheet) return swallow_structured(start, body);
        if (is_cell_ref_text(body))
            return Token{Token::Kind::cell_ref, std::move(body), start, ext,
                         std::move(sheet)};
        std::string up = upper(body);
        if (!ext && !sheet && (up == "TRUE" || up == "FALSE"))
            return Token{Token::Kind::boolean, up, start, std::nullopt, std::nullopt};
        return Token{Token::Kind::ident, std::move(body), start, ext, std::move(sheet)};
    }
};

// ---- parser ----

constexpr int kMaxParseDepth = 400;

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    Ast run() {
        if (tokens_.empty()) fail(0, "empty formula");
        Ast ast = comparison();
        if (pos_ < tokens_.size()) fail_here("trailing input");
        return ast;
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    int depth_ = 0;

    [[noreturn]] void fail(std::size_t offset, const std::string& why) {
        throw Error(errc::parse_error, "offset " + std::to_string(offset) + ": " + why);
    }
    [[noreturn]] void fail_here(const std::string& why) {
        fail(pos_ < tokens_.size() ? tokens_[pos_].offset : last_offset(), why);
    }
    std::size_t last_offset() const {
        return tokens_.empty() ? 0 : tokens_.back().offset + tokens_.back().text.size();
    }

    const Token* peek() const { return pos_ < tokens_.size() ? &tokens_[pos_] : nullptr; }
    const Token& take() { return tokens_[pos_++]; }
    bool at_op(std::string_view text) const {
        const Token* t = peek();
        return t && t->kind == Token::Kind::op && t->text == text;
    }

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& p_) : p(p_) {
            if (++p.depth_ > kMaxParseDepth) p.fail_here("nesting too deep");
        }
        ~DepthGuard() { --p.depth_; }
    };

    Ast comparison() {
        DepthGuard g(*this);
        Ast lhs = concat();
        while (at_op("=") || at_op("<>") || at_op("<") || at_op("<=") || at_op(">") ||
               at_op(">=")) {
            std::string op = take().text;
            Ast rhs = concat();
            lhs = binary(std::move(op), std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    Ast concat() {
        Ast lhs = additive();
        while (at_op("&")) {
            take();
            lhs = binary("&", std::move(lhs), additive());
        }
        return lhs;
    }

    Ast additive() {
        Ast lhs = multiplicative();
        while (at_op("+") || at_op("-")) {
            std::string op = take().text;
            lhs = binary(std::move(op), std::move(lhs), multiplicative());
        }
        return lhs;
    }

    Ast multiplicative() {
        Ast lhs = exponent();
        while (at_op("*") || at_op("/")) {
            std::string op = take().text;
            lhs = binary(std::move(op), std::move(lhs), exponent());
        }
        return lhs;
    }

    Ast exponent() {
        Ast lhs = unary();
        while (at_op("^")) {
            take();
            lhs = binary("^", std::move(lhs), unary());
        }
        return lhs;
    }

    Ast unary() {
        DepthGuard g(*this);
        if (at_op("-") || at_op("+")) {
            std::string op = take().text;
            Ast node{Ast::Kind::unary, std::move(op), {}, std::nullopt, std::nullopt, {}};
            node.children.push_back(unary());
            return node;
        }
        return postfix();
    }

    Ast postfix() {
        Ast inner = primary();
        while (at_op("%")) {
            take();
            Ast node{Ast::Kind::unary, "%", {}, std::nullopt, std::nullopt, {}};
            node.children.push_back(std::move(inner));
            inner = std::move(node);
        }
        return inner;
    }

    Ast binary(std::string op, Ast lhs, Ast rhs) {
        Ast node{Ast::Kind::binary, std::move(op), {}, std::nullopt, std::nullopt, {}};
        node.children.push_back(std::move(lhs));
        node.children.push_back(std::move(rhs));
        return node;
    }

    Ast primary() {
        DepthGuard g(*this);
        const Token* t = peek();
        if (!t) fail_here("expected an expression");
        switch (t->kind) {
            case Token::Kind::number: {
                Token tok = take();
                // whole-row spans like "1:3" are references, kept opaque
                if (peek() && peek()->kind == Token::Kind::colon && pos_ + 1 < tokens_.size() &&
                    tokens_[pos_ + 1].kind == Token::Kind::number) {
                    take();
                    return Ast{Ast::Kind::name_ref, tok.text + ":" + take().text, {},
                               std::nullopt, std::nullopt, {}};
                }
                return Ast{Ast::Kind::number, std::move(tok.text), {}, std::nullopt,
                           std::nullopt, {}};
            }
            case Token::Kind::string:
                return Ast{Ast::Kind::text_lit, take().text, {}, std::nullopt,
                           std::nullopt, {}};
            case Token::Kind::error_lit:
                return Ast{Ast::Kind::error_lit, take().text, {}, std::nullopt,
                           std::nullopt, {}};
            case Token::Kind::boolean: {
                Token tok = take();
                if (peek() && peek()->kind == Token::Kind::lparen)
                    return call(std::move(tok));  // TRUE() / FALSE() are functions
                return Ast{Ast::Kind::boolean, std::move(tok.text), {}, std::nullopt,
                           std::nullopt, {}};
            }
            case Token::Kind::cell_ref: {
                Token tok = take();
                if (peek() && peek()->kind == Token::Kind::lparen)
                    return call(std::move(tok));  // e.g. LOG10(...) lexes ref-like
                return ref_or_range(std::move(tok));
            }
            case Token::Kind::ident: {
                Token tok = take();
                if (peek() && peek()->kind == Token::Kind::lparen)
                    return call(std::move(tok));
                // whole-column spans like "A:A" are references, kept opaque
                if (peek() && peek()->kind == Token::Kind::colon && pos_ + 1 < tokens_.size() &&
                    (tokens_[pos_ + 1].kind == Token::Kind::ident ||
                     tokens_[pos_ + 1].kind == Token::Kind::cell_ref)) {
                    take();
                    return Ast{Ast::Kind::name_ref, tok.text + ":" + take().text, {},
                               tok.external_index, tok.sheet, {}};
                }
                Ast node{Ast::Kind::name_ref, std::move(tok.text), {}, tok.external_index,
                         tok.sheet, {}};
                return node;
            }
            case Token::Kind::lparen: {
                take();
                Ast inner = comparison();
                if (!peek() || peek()->kind != Token::Kind::rparen)
                    fail_here("expected ')'");
                take();
                Ast node{Ast::Kind::paren, {}, {}, std::nullopt, std::nullopt, {}};
                node.children.push_back(std::move(inner));
                return node;
            }
            case Token::Kind::lbrace: return array_literal();
            default: fail_here("unexpected token '" + t->text + "'");
        }
    }

    Ast ref_or_range(Token start) {
        if (peek() && peek()->kind == Token::Kind::colon) {
            std::size_t save = pos_;
            take();  // ':'
            if (peek() && peek()->kind == Token::Kind::cell_ref) {
                Token end = take();
                Ast node{Ast::Kind::range, start.text, end.text, start.external_index,
                         start.sheet, {}};
                // chained ranges (A1:B2:C3) fold left into the end text
                while (peek() && peek()->kind == Token::Kind::colon) {
                    std::size_t save2 = pos_;
                    take();
                    if (peek() && peek()->kind == Token::Kind::cell_ref) {
                        node.range_end = take().text;
                    } else {
                        pos_ = save2;
                        break;
                    }
                }
                return node;
            }
            pos_ = save;  // ':' wasn't a range; let the caller's error surface
        }
        return Ast{Ast::Kind::cell_ref, start.text, {}, start.external_index, start.sheet,
                   {}};
    }

    Ast call(Token name) {
        take();  // '('
        Ast node{Ast::Kind::call, std::move(name.text), {}, name.external_index,
                 name.sheet, {}};
        if (peek() && peek()->kind == Token::Kind::rparen) {
            take();
            return node;
        }
        while (true) {
            node.children.push_back(comparison());
            const Token* t = peek();
            if (!t) fail_here("expected ')' in argument list");
            if (t->kind == Token::Kind::comma) {
                take();
                continue;
            }
            if (t->kind == Token::Kind::rparen) {
                take();
                return node;
            }
            fail_here("expected ',' or ')'");
        }
    }

    Ast array_literal() {
        take();  // '{'
        Ast node{Ast::Kind::array, {}, {}, std::nullopt, std::nullopt, {}};
        if (peek() && peek()->kind == Token::Kind::rbrace) {
            take();
            return node;
        }
        while (true) {
            node.children.push_back(comparison());
            const Token* t = peek();
            if (!t) fail_here("expected '}'");
            if (t->kind == Token::Kind::comma || t->kind == Token::Kind::semicolon) {
                take();
                continue;
            }
            if (t->kind == Token::Kind::rbrace) {
                take();
                return node;
            }
            fail_here("expected ',' ';' or '}'");
        }
    }
};

}  // namespace

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

Ast parse(std::string_view text) { return Parser(tokenize(text)).run(); }

std::uint32_t if_nesting_depth(const Ast& ast) {
    std::uint32_t below = 0;
    for (const Ast& c : ast.children) below = std::max(below, if_nesting_depth(c));
    if (ast.kind == Ast::Kind::call && upper(ast.text) == "IF") return below + 1;
    return below;
}

namespace {
void census_walk(const Ast& ast, std::map<std::string, std::uint32_t>& out) {
    if (ast.kind == Ast::Kind::call) ++out[upper(ast.text)];
    for (const Ast& c : ast.children) census_walk(c, out);
}

void refs_walk(const Ast& ast, std::vector<RefTarget>& out) {
    if (ast.kind == Ast::Kind::cell_ref || ast.kind == Ast::Kind::range) {
        RefTarget t;
        t.scope = ast.external_index ? RefTarget::Scope::external
                                     : RefTarget::Scope::internal;
        t.workbook_index = ast.external_index;
        t.sheet = ast.sheet;
        t.range_text = ast.kind == Ast::Kind::range ? ast.text + ":" + ast.range_end
                                                    : ast.text;
        out.push_back(std::move(t));
    }
    for (const Ast& c : ast.children) refs_walk(c, out);
}
}  // namespace

std::map<std::string, std::uint32_t> function_census(const Ast& ast) {
    std::map<std::string, std::uint32_t> out;
    census_walk(ast, out);
    return out;
}

std::vector<RefTarget> extract_refs(const Ast& ast) {
    std::vector<RefTarget> out;
    refs_walk(ast, out);
    return out;
}

Analysis analyze(std::string_view text) {
    Analysis a;
    try {
        Ast ast = parse(text);
        a.parsed = true;
        a.if_depth = if_nesting_depth(ast);
        a.census = function_census(ast);
        a.refs = extract_refs(ast);
    } catch (const Error& e) {
        a.parsed = false;
        a.error_code = e.code();
        a.error_detail = e.what();
    }
    return a;
}

}  // namespace ssrisk::formula
