#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssrisk/errors.hpp"

namespace ssrisk::formula {

// One lexed token. Cell references are lexed as composite tokens carrying
// their optional '[n]' external prefix and sheet qualifier, so "A1", "$B$2",
// "Rates!C3" and "[1]'P&L Q2'!D4" all arrive as a single cell_ref.
struct Token {
    enum class Kind {
        number,
        string,
        boolean,
        error_lit,
        ident,  // names, functions, opaque structured references
        cell_ref,
        op,  // + - * / ^ & % = <> < <= > >=
        colon,
        comma,
        semicolon,
        lparen,
        rparen,
        lbrace,
        rbrace,
    };
    Kind kind;
    std::string text;  // body text without sheet/external qualifiers
    std::size_t offset = 0;
    std::optional<int> external_index;
    std::optional<std::string> sheet;

    bool operator==(const Token&) const = default;
};

// Throws Error with code `lex-error` (offset in the message) on unterminated
// strings or bytes outside the grammar.
std::vector<Token> tokenize(std::string_view text);

// Parse tree. One node type keeps the walkers short; `kind` says which
// fields are meaningful.
struct Ast {
    enum class Kind {
        number,     // text = literal
        text_lit,   // text = decoded string value
        boolean,    // text = "TRUE"/"FALSE"
        error_lit,  // text = "#REF!" etc.
        cell_ref,   // text = "A1"; external_index/sheet qualify
        range,      // text = start, range_end = end; qualifiers from the start ref
        name_ref,   // text = name (defined name, structured ref, out-of-grammar blob)
        call,       // text = function name as written; children = args
        unary,      // text = "-", "+" or postfix "%"; one child
        binary,     // text = operator; children = {lhs, rhs}
        array,      // children = elements, rows flattened
        paren,      // one child
    };
    Kind kind;
    std::string text;
    std::string range_end;
    std::optional<int> external_index;
    std::optional<std::string> sheet;
    std::vector<Ast> children;
};

// Throws Error with `lex-error` or `parse-error` (offset in the message).
Ast parse(std::string_view text);

// Maximum count of IF calls on any root-to-leaf path; case-insensitive.
std::uint32_t if_nesting_depth(const Ast& ast);

// Occurrences per function name, uppercased.
std::map<std::string, std::uint32_t> function_census(const Ast& ast);

struct RefTarget {
    enum class Scope { internal, external };
    Scope scope = Scope::internal;
    std::optional<int> workbook_index;  // external only: the bracketed index
    std::optional<std::string> sheet;
    std::string range_text;  // "A1" or "A1:B2"

    bool operator==(const RefTarget&) const = default;
};

// Every cell-ref/range node, one target each, duplicates kept, source order.
std::vector<RefTarget> extract_refs(const Ast& ast);

// Total analysis: never throws. Unparseable text degrades to unparsed=true
// with depth 0 and empty census/refs.
struct Analysis {
    bool parsed = false;
    std::uint32_t if_depth = 0;
    std::map<std::string, std::uint32_t> census;
    std::vector<RefTarget> refs;
    std::string error_code;    // lex-error / parse-error when unparsed
    std::string error_detail;
};

Analysis analyze(std::string_view text);

}  // namespace ssrisk::formula
