#pragma once

// Strict parser for structured doctor responses.
//
// Accepted grammar (a closed subset of YAML block style):
//
//   document   := [fence-open] [---] mapping [fence-close]
//   mapping    := entry entry              ; exactly the question and options keys, any order
//   entry      := KEY ':' value
//   question   := scalar                   ; plain, single-quoted, double-quoted, '|' or '>'
//   options    := NEWLINE item+            ; block sequence, items share one indentation
//   item       := '-' ' ' scalar
//
// Plain scalars may continue on more-indented lines and are folded with single
// spaces. Quoted scalars may span lines. Blank lines and full-line '#'
// comments are ignored between entries. Anything else (extra keys, flow
// collections, nested mappings or sequences, anchors, tags, tabs used for
// indentation) is rejected with a positioned failure. The parser never throws.

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "turnkit/corpus.hpp"
#include "turnkit/unicode.hpp"

namespace turnkit::validator {

using corpus::ParsedResponse;

enum class ParseFailureKind {
    empty_input,
    unterminated_fence,
    not_a_mapping,
    bad_indentation,
    missing_key,
    unexpected_key,
    duplicate_key,
    options_not_sequence,
    nested_structure,
    bad_scalar,
    empty_value,
    duplicate_option,
};

inline const char* to_string(ParseFailureKind k) {
    switch (k) {
        case ParseFailureKind::empty_input: return "empty_input";
        case ParseFailureKind::unterminated_fence: return "unterminated_fence";
        case ParseFailureKind::not_a_mapping: return "not_a_mapping";
        case ParseFailureKind::bad_indentation: return "bad_indentation";
        case ParseFailureKind::missing_key: return "missing_key";
        case ParseFailureKind::unexpected_key: return "unexpected_key";
        case ParseFailureKind::duplicate_key: return "duplicate_key";
        case ParseFailureKind::options_not_sequence: return "options_not_sequence";
        case ParseFailureKind::nested_structure: return "nested_structure";
        case ParseFailureKind::bad_scalar: return "bad_scalar";
        case ParseFailureKind::empty_value: return "empty_value";
        case ParseFailureKind::duplicate_option: return "duplicate_option";
    }
    return "unknown";
}

struct ParseFailure {
    ParseFailureKind kind;
    std::string message;
    size_t line = 0;    ///< 1-based line in the raw text
    size_t column = 0;  ///< 1-based, counted in code points

    std::string describe() const {
        return std::string(to_string(kind)) + " at " + std::to_string(line) + ":" + std::to_string(column) +
               ": " + message;
    }
};

using ParseResult = std::variant<ParsedResponse, ParseFailure>;

struct KeyNames {
    std::string question = "question";
    std::string options = "options";
    bool case_insensitive = true;
};

namespace detail {

struct Line {
    std::string text;
    size_t number;
};

struct Failure {
    ParseFailure value;
};

class Parser {
public:
    Parser(std::string_view raw, KeyNames keys) : keys_(std::move(keys)) {
        size_t pos = 0;
        size_t number = 1;
        while (pos <= raw.size()) {
            auto nl = raw.find('\n', pos);
            if (nl == std::string_view::npos) nl = raw.size();
            std::string text(raw.substr(pos, nl - pos));
            if (!text.empty() && text.back() == '\r') text.pop_back();
            lines_.push_back({std::move(text), number++});
            if (nl == raw.size()) break;
            pos = nl + 1;
        }
    }

    ParseResult run() {
        try {
            return parse_document();
        } catch (const Failure& f) {
            return f.value;
        }
    }

private:
    [[noreturn]] void fail(ParseFailureKind kind, std::string message, size_t line_idx, size_t byte_col) {
        size_t line = 0;
        size_t column = 1;
        if (line_idx < lines_.size()) {
            line = lines_[line_idx].number;
            const auto& text = lines_[line_idx].text;
            column = unicode::decode(std::string_view(text).substr(0, std::min(byte_col, text.size()))).size() + 1;
        } else if (!lines_.empty()) {
            line = lines_.back().number;
        }
        throw Failure{ParseFailure{kind, std::move(message), line, column}};
    }

    static bool blank(std::string_view s) { return s.find_first_not_of(" \t") == std::string_view::npos; }

    static size_t indent_of(std::string_view s) {
        size_t i = 0;
        while (i < s.size() && s[i] == ' ') ++i;
        return i;
    }

    bool skippable(size_t i) const {
        const auto& t = lines_[i].text;
        if (blank(t)) return true;
        const auto first = t.find_first_not_of(" \t");
        return t[first] == '#';
    }

    size_t next_content(size_t i) const {
        while (i < end_ && skippable(i)) ++i;
        return i;
    }

    void check_tabs(size_t i) {
        const auto& t = lines_[i].text;
        const auto first = t.find_first_not_of(' ');
        if (first != std::string::npos && t[first] == '\t')
            fail(ParseFailureKind::bad_indentation, "tab character used for indentation", i, first);
    }

    bool key_equals(std::string_view key, std::string_view expected) const {
        if (!keys_.case_insensitive) return key == expected;
        return unicode::fold(key) == unicode::fold(expected);
    }

    ParseResult parse_document() {
        begin_ = 0;
        end_ = lines_.size();
        size_t first = next_content(0);
        if (first >= end_) fail(ParseFailureKind::empty_input, "response is empty", 0, 0);

        // Optional code fence.
        const auto first_trim = unicode::trim(lines_[first].text);
        if (first_trim.substr(0, 3) == "```") {
            size_t last = end_;
            while (last > first + 1 && blank(lines_[last - 1].text)) --last;
            if (last <= first + 1 || unicode::trim(lines_[last - 1].text) != "```")
                fail(ParseFailureKind::unterminated_fence, "code fence is not closed", first, 0);
            begin_ = first + 1;
            end_ = last - 1;
            first = next_content(begin_);
            if (first >= end_) fail(ParseFailureKind::empty_input, "code fence is empty", begin_, 0);
        }
        if (unicode::trim(lines_[first].text) == "---") {
            first = next_content(first + 1);
            if (first >= end_) fail(ParseFailureKind::empty_input, "document is empty", first - 1, 0);
        }

        check_tabs(first);
        base_indent_ = indent_of(lines_[first].text);
        std::optional<std::string> question;
        std::optional<std::vector<std::string>> options;
        std::set<std::string> seen_keys;

        size_t i = first;
        while (i < end_) {
            i = next_content(i);
            if (i >= end_) break;
            check_tabs(i);
            const auto& text = lines_[i].text;
            const size_t indent = indent_of(text);
            if (indent != base_indent_)
                fail(ParseFailureKind::bad_indentation, "mapping keys must share one indentation level", i, indent);
            std::string_view rest = std::string_view(text).substr(indent);
            if (rest.substr(0, 2) == "- " || rest == "-")
                fail(ParseFailureKind::not_a_mapping, "top level is a sequence, expected a mapping", i, indent);
            if (rest.front() == '[' || rest.front() == '{')
                fail(ParseFailureKind::not_a_mapping, "flow collections are not allowed", i, indent);

            size_t value_col = 0;
            std::string key = read_key(i, indent, value_col);
            const std::string folded = keys_.case_insensitive ? unicode::fold(key) : key;
            if (!seen_keys.insert(folded).second)
                fail(ParseFailureKind::duplicate_key, "duplicate key '" + key + "'", i, indent);

            if (key_equals(key, keys_.question)) {
                question = read_scalar_value(i, value_col, base_indent_, "question");
            } else if (key_equals(key, keys_.options)) {
                options = read_sequence(i, value_col);
            } else {
                fail(ParseFailureKind::unexpected_key, "unexpected key '" + key + "'", i, indent);
            }
        }

        if (!question) fail(ParseFailureKind::missing_key, "missing key '" + keys_.question + "'", end_, 0);
        if (!options) fail(ParseFailureKind::missing_key, "missing key '" + keys_.options + "'", end_, 0);

        ParsedResponse out;
        out.question = unicode::trim_unicode(*question);
        if (out.question.empty())
            fail(ParseFailureKind::empty_value, "question is empty", question_line_, 0);
        std::set<std::string> distinct;
        for (size_t k = 0; k < options->size(); ++k) {
            auto opt = unicode::trim_unicode((*options)[k]);
            if (opt.empty()) fail(ParseFailureKind::empty_value, "empty option", option_lines_[k], option_cols_[k]);
            if (!distinct.insert(opt).second)
                fail(ParseFailureKind::duplicate_option, "duplicate option '" + opt + "'", option_lines_[k], option_cols_[k]);
            out.options.push_back(std::move(opt));
        }
        return out;
    }

    // Reads `KEY:` at line i starting at byte `col`; sets value_col to the
    // byte offset after the colon.
    std::string read_key(size_t i, size_t col, size_t& value_col) {
        const std::string& text = lines_[i].text;
        if (text[col] == '"' || text[col] == '\'') {
            size_t li = i;
            size_t c = col;
            std::string key = read_quoted(li, c);
            if (li != i) fail(ParseFailureKind::bad_scalar, "multi-line keys are not allowed", i, col);
            if (c >= text.size() || text[c] != ':' || (c + 1 < text.size() && text[c + 1] != ' '))
                fail(ParseFailureKind::not_a_mapping, "expected ':' after key", i, c);
            value_col = c + 1;
            return key;
        }
        for (size_t c = col; c < text.size(); ++c) {
            if (text[c] == ':' && (c + 1 == text.size() || text[c + 1] == ' ' || text[c + 1] == '\t')) {
                std::string key(unicode::trim(std::string_view(text).substr(col, c - col)));
                if (key.empty()) fail(ParseFailureKind::not_a_mapping, "empty key", i, col);
                if (key.find(" #") != std::string::npos)
                    fail(ParseFailureKind::not_a_mapping, "expected a 'key: value' line", i, col);
                value_col = c + 1;
                return key;
            }
        }
        fail(ParseFailureKind::not_a_mapping, "expected a 'key: value' line", i, col);
    }

    // Parses a quoted scalar starting at lines_[li].text[col] (a quote).
    // On return li/col point just after the closing quote.
    std::string read_quoted(size_t& li, size_t& col) {
        const char quote = lines_[li].text[col];
        const size_t start_line = li;
        const size_t start_col = col;
        std::string out;
        size_t c = col + 1;
        for (;;) {
            const std::string& text = lines_[li].text;
            while (c < text.size()) {
                const char ch = text[c];
                if (ch == quote) {
                    if (quote == '\'' && c + 1 < text.size() && text[c + 1] == '\'') {
                        out += '\'';
                        c += 2;
                        continue;
                    }
                    col = c + 1;
                    return out;
                }
                if (quote == '"' && ch == '\\') {
                    if (c + 1 >= text.size()) {
                        // escaped line break: join without space
                        c = text.size();
                        goto next_line_no_fold;
                    }
                    c = read_escape(li, c, out);
                    continue;
                }
                out += ch;
                ++c;
            }
            // line break inside the scalar: trailing spaces dropped, folded to
            // a space or to newlines for blank lines
            while (!out.empty() && (out.back() == ' ' || out.back() == '\t')) out.pop_back();
            {
                size_t blanks = 0;
                ++li;
                while (li < end_ && blank(lines_[li].text)) {
                    ++blanks;
                    ++li;
                }
                if (li >= end_) fail(ParseFailureKind::bad_scalar, "unterminated quoted scalar", start_line, start_col);
                out += blanks ? std::string(blanks, '\n') : std::string(" ");
                const auto& nt = lines_[li].text;
                c = nt.find_first_not_of(" \t");
                continue;
            }
        next_line_no_fold:
            ++li;
            if (li >= end_) fail(ParseFailureKind::bad_scalar, "unterminated quoted scalar", start_line, start_col);
            c = lines_[li].text.find_first_not_of(" \t");
            if (c == std::string::npos) c = lines_[li].text.size();
        }
    }

    size_t read_escape(size_t li, size_t c, std::string& out) {
        const std::string& text = lines_[li].text;
        const char e = text[c + 1];
        switch (e) {
            case '"': out += '"'; return c + 2;
            case '\\': out += '\\'; return c + 2;
            case '/': out += '/'; return c + 2;
            case 'n': out += '\n'; return c + 2;
            case 't': out += '\t'; return c + 2;
            case 'r': out += '\r'; return c + 2;
            case '0': out += '\0'; return c + 2;
            case ' ': out += ' '; return c + 2;
            case 'x':
            case 'u':
            case 'U': {
                const size_t digits = e == 'x' ? 2 : e == 'u' ? 4 : 8;
                if (c + 2 + digits > text.size())
                    fail(ParseFailureKind::bad_scalar, "truncated escape sequence", li, c);
                char32_t cp = 0;
                for (size_t k = 0; k < digits; ++k) {
                    const char h = text[c + 2 + k];
                    int v;
                    if (h >= '0' && h <= '9') v = h - '0';
                    else if (h >= 'a' && h <= 'f') v = h - 'a' + 10;
                    else if (h >= 'A' && h <= 'F') v = h - 'A' + 10;
                    else fail(ParseFailureKind::bad_scalar, "invalid hex digit in escape", li, c + 2 + k);
                    cp = cp * 16 + static_cast<char32_t>(v);
                }
                if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
                    fail(ParseFailureKind::bad_scalar, "escape is not a Unicode scalar value", li, c);
                unicode::append(out, cp);
                return c + 2 + digits;
            }
            default:
                fail(ParseFailureKind::bad_scalar, std::string("unknown escape '\\") + e + "'", li, c);
        }
    }

    // After a closing quote only whitespace or a comment may follow.
    void expect_line_end(size_t li, size_t col) {
        const std::string& text = lines_[li].text;
        size_t c = col;
        while (c < text.size() && (text[c] == ' ' || text[c] == '\t')) ++c;
        if (c == text.size()) return;
        if (text[c] == '#' && c > col) return;
        if (text[c] == ':')
            fail(ParseFailureKind::nested_structure, "nested mapping is not allowed here", li, c);
        fail(ParseFailureKind::bad_scalar, "unexpected content after quoted scalar", li, c);
    }

    // Plain-scalar text on one line, with an inline comment removed.
    std::string plain_fragment(size_t li, size_t col) {
        const std::string& text = lines_[li].text;
        std::string_view v = std::string_view(text).substr(col);
        for (size_t k = 0; k < v.size(); ++k) {
            if (v[k] == '#' && k > 0 && (v[k - 1] == ' ' || v[k - 1] == '\t')) {
                v = v.substr(0, k);
                break;
            }
        }
        v = unicode::trim(v);
        for (size_t k = 0; k + 1 <= v.size(); ++k) {
            if (v[k] == ':' && (k + 1 == v.size() || v[k + 1] == ' ' || v[k + 1] == '\t'))
                fail(ParseFailureKind::nested_structure, "nested mapping is not allowed here",
                     li, static_cast<size_t>(v.data() - text.data()) + k);
        }
        return std::string(v);
    }

    void check_plain_start(size_t li, size_t col) {
        const char c = lines_[li].text[col];
        const std::string_view s = std::string_view(lines_[li].text).substr(col);
        if (c == '[' || c == '{')
            fail(ParseFailureKind::nested_structure, "flow collections are not allowed", li, col);
        if (s.substr(0, 2) == "- " || s == "-")
            fail(ParseFailureKind::nested_structure, "nested sequence is not allowed", li, col);
        if (c == '&' || c == '*' || c == '!')
            fail(ParseFailureKind::bad_scalar, "anchors, aliases and tags are not supported", li, col);
        if (c == '@' || c == '`' || c == '%' || c == ']' || c == '}' || c == ',')
            fail(ParseFailureKind::bad_scalar, std::string("reserved indicator '") + c + "'", li, col);
        if ((c == '?' || c == ':') && (s.size() == 1 || s[1] == ' '))
            fail(ParseFailureKind::nested_structure, "complex mapping keys are not allowed", li, col);
    }

    // Reads the scalar that begins at byte `col` of line `li`, or on the
    // following more-indented lines when the rest of the line is empty.
    // `parent_indent` is the indentation of the owning key or sequence dash.
    // Advances `li` past the scalar's last line.
    std::string read_scalar(size_t& li, size_t col, size_t parent_indent, const std::string& what) {
        const std::string& text = lines_[li].text;
        while (col < text.size() && (text[col] == ' ' || text[col] == '\t')) ++col;
        if (col >= text.size() || text[col] == '#') {
            // value on following lines
            const size_t next = next_content(li + 1);
            if (next >= end_ || indent_of(lines_[next].text) <= parent_indent)
                fail(ParseFailureKind::empty_value, what + " has no value", li, col);
            check_tabs(next);
            li = next;
            return read_scalar(li, indent_of(lines_[next].text), parent_indent, what);
        }
        const char c = text[col];
        if (c == '"' || c == '\'') {
            size_t c2 = col;
            std::string v = read_quoted(li, c2);
            expect_line_end(li, c2);
            ++li;
            return v;
        }
        if (c == '|' || c == '>') return read_block_scalar(li, col, parent_indent);
        check_plain_start(li, col);
        std::string value = plain_fragment(li, col);
        ++li;
        // continuation lines
        while (true) {
            const size_t next = next_content(li);
            if (next >= end_) break;
            const auto& nt = lines_[next].text;
            const size_t ind = indent_of(nt);
            if (ind <= parent_indent) break;
            check_tabs(next);
            if (std::string_view(nt).substr(ind, 2) == "- ")
                fail(ParseFailureKind::nested_structure, "nested sequence is not allowed", next, ind);
            value += ' ';
            value += plain_fragment(next, ind);
            li = next + 1;
        }
        return value;
    }

    std::string read_block_scalar(size_t& li, size_t col, size_t parent_indent) {
        const std::string& header = lines_[li].text;
        const bool literal = header[col] == '|';
        std::string_view rest = unicode::trim(std::string_view(header).substr(col + 1));
        bool keep = false;
        bool strip = false;
        if (!rest.empty() && (rest[0] == '-' || rest[0] == '+')) {
            strip = rest[0] == '-';
            keep = rest[0] == '+';
            rest.remove_prefix(1);
        }
        if (!rest.empty() && rest[0] != '#')
            fail(ParseFailureKind::bad_scalar, "unsupported block scalar header", li, col);
        ++li;
        size_t content_indent = 0;
        std::vector<std::string> parts;
        size_t trailing_blank = 0;
        while (li < end_) {
            const auto& t = lines_[li].text;
            if (blank(t)) {
                parts.emplace_back();
                ++trailing_blank;
                ++li;
                continue;
            }
            const size_t ind = indent_of(t);
            if (ind <= parent_indent) break;
            check_tabs(li);
            if (content_indent == 0) content_indent = ind;
            if (ind < content_indent)
                fail(ParseFailureKind::bad_indentation, "block scalar line is under-indented", li, ind);
            parts.push_back(t.substr(content_indent));
            trailing_blank = 0;
            ++li;
        }
        // blank lines after the scalar belong to the document, not the value
        li -= trailing_blank;
        parts.resize(parts.size() - trailing_blank);
        if (parts.empty()) fail(ParseFailureKind::empty_value, "block scalar is empty", li - 1, col);
        std::string out;
        for (size_t k = 0; k < parts.size(); ++k) {
            if (k > 0) out += (literal || parts[k].empty() || parts[k - 1].empty()) ? "\n" : " ";
            out += parts[k];
        }
        if (!strip) out += '\n';
        (void)keep;
        return out;
    }

    std::string read_scalar_value(size_t& li, size_t value_col, size_t parent_indent, const std::string& what) {
        question_line_ = li;
        return read_scalar(li, value_col, parent_indent, what);
    }

    std::vector<std::string> read_sequence(size_t& li, size_t value_col) {
        const std::string& text = lines_[li].text;
        size_t c = value_col;
        while (c < text.size() && (text[c] == ' ' || text[c] == '\t')) ++c;
        if (c < text.size() && text[c] != '#') {
            if (text[c] == '[' || text[c] == '{')
                fail(ParseFailureKind::options_not_sequence, "options must be a block sequence, not a flow collection", li, c);
            fail(ParseFailureKind::options_not_sequence, "options must be a block sequence, not a scalar", li, c);
        }
        const size_t key_line = li;
        ++li;
        std::vector<std::string> items;
        option_lines_.clear();
        option_cols_.clear();
        std::optional<size_t> item_indent;
        while (true) {
            const size_t next = next_content(li);
            if (next >= end_) break;
            check_tabs(next);
            const auto& nt = lines_[next].text;
            const size_t ind = indent_of(nt);
            const std::string_view rest = std::string_view(nt).substr(ind);
            const bool dash = rest.substr(0, 2) == "- " || rest == "-";
            if (ind < base_indent_) fail(ParseFailureKind::bad_indentation, "line is under-indented", next, ind);
            if (ind == base_indent_ && !dash) break;  // next mapping key
            if (!dash) {
                if (items.empty())
                    fail(ParseFailureKind::options_not_sequence, "options must be a block sequence", next, ind);
                fail(ParseFailureKind::bad_indentation, "unexpected indented line in options", next, ind);
            }
            if (!item_indent) item_indent = ind;
            if (ind != *item_indent)
                fail(ParseFailureKind::bad_indentation, "sequence items must share one indentation level", next, ind);
            li = next;
            option_lines_.push_back(li);
            option_cols_.push_back(std::min(nt.find_first_not_of(' ', ind + 1), nt.size()));
            items.push_back(read_scalar(li, ind + 1, ind, "option"));
        }
        if (items.empty())
            fail(ParseFailureKind::options_not_sequence, "options has no sequence items", key_line, value_col);
        return items;
    }

    KeyNames keys_;
    std::vector<Line> lines_;
    size_t begin_ = 0;
    size_t end_ = 0;
    size_t base_indent_ = 0;
    size_t question_line_ = 0;
    std::vector<size_t> option_lines_;
    std::vector<size_t> option_cols_;
};

}  // namespace detail

inline ParseResult parse_structured_response(std::string_view raw, const KeyNames& keys = {}) {
    try {
        return detail::Parser(raw, keys).run();
    } catch (const std::exception& e) {
        // Only allocation failures can reach here.
        return ParseFailure{ParseFailureKind::bad_scalar, e.what(), 0, 0};
    }
}

inline bool parsed_ok(const ParseResult& r) { return std::holds_alternative<ParsedResponse>(r); }

}  // namespace turnkit::validator
