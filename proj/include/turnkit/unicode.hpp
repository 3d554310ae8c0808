#pragma once

// UTF-8 helpers backed by ICU's character property tables.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/uchar.h>
#include <unicode/uscript.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace turnkit::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes UTF-8; ill-formed sequences become U+FFFD.
inline std::u32string decode(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
    const auto length = static_cast<int32_t>(text.size());
    int32_t i = 0;
    while (i < length) {
        UChar32 c;
        U8_NEXT(bytes, i, length, c);
        out.push_back(c < 0 ? kReplacement : static_cast<char32_t>(c));
    }
    return out;
}

inline void append(std::string& out, char32_t c) {
    uint8_t buf[4];
    int32_t n = 0;
    UBool error = false;
    U8_APPEND(buf, n, 4, static_cast<UChar32>(c), error);
    if (error) {
        append(out, kReplacement);
        return;
    }
    out.append(reinterpret_cast<const char*>(buf), static_cast<size_t>(n));
}

inline std::string encode(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t c : text) append(out, c);
    return out;
}

inline bool is_letter(char32_t c) { return u_isalpha(static_cast<UChar32>(c)) != 0; }

inline bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0; }

/// Letters, combining marks and decimal/other numbers continue a word.
inline bool is_word_char(char32_t c) {
    const auto mask = U_GET_GC_MASK(static_cast<UChar32>(c));
    return (mask & (U_GC_L_MASK | U_GC_M_MASK | U_GC_N_MASK)) != 0;
}

inline bool is_punct_or_symbol(char32_t c) {
    const auto mask = U_GET_GC_MASK(static_cast<UChar32>(c));
    return (mask & (U_GC_P_MASK | U_GC_S_MASK)) != 0;
}

inline char32_t fold(char32_t c) {
    return static_cast<char32_t>(u_foldCase(static_cast<UChar32>(c), U_FOLD_CASE_DEFAULT));
}

inline std::u32string fold(std::u32string_view text) {
    std::u32string out(text);
    for (auto& c : out) c = fold(c);
    return out;
}

/// Full case folding, so "STRASSE" and "straße" compare equal.
inline std::string fold(std::string_view text) {
    auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    std::string out;
    u.foldCase(U_FOLD_CASE_DEFAULT).toUTF8String(out);
    return out;
}

/// ISO 15924 short name of the script of `c` ("Hang", "Latn", ...).
inline std::string script_code(char32_t c) {
    UErrorCode status = U_ZERO_ERROR;
    const UScriptCode code = uscript_getScript(static_cast<UChar32>(c), &status);
    if (U_FAILURE(status)) return "Zyyy";
    const char* name = uscript_getShortName(code);
    return name ? name : "Zzzz";
}

/// Resolves a script name as accepted in rule files. Besides ICU script names
/// ("Hangul", "Latin", "Han", "Hang", ...) the pseudo-script "BasicLatin" is
/// accepted, meaning ASCII letters only.
class ScriptSet {
public:
    ScriptSet() = default;

    explicit ScriptSet(const std::vector<std::string>& names) {
        for (const auto& name : names) add(name);
    }

    /// Returns false if the name is unknown.
    bool add(const std::string& name) {
        if (name == "BasicLatin") {
            basic_latin_ = true;
            return true;
        }
        const int32_t code = u_getPropertyValueEnum(UCHAR_SCRIPT, name.c_str());
        if (code == UCHAR_INVALID_CODE) return false;
        scripts_.push_back(static_cast<UScriptCode>(code));
        return true;
    }

    static bool known(const std::string& name) {
        return name == "BasicLatin" ||
               u_getPropertyValueEnum(UCHAR_SCRIPT, name.c_str()) != UCHAR_INVALID_CODE;
    }

    bool contains(char32_t c) const {
        if (basic_latin_ && ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z'))) return true;
        if (scripts_.empty()) return false;
        UErrorCode status = U_ZERO_ERROR;
        const UScriptCode code = uscript_getScript(static_cast<UChar32>(c), &status);
        if (U_FAILURE(status)) return false;
        for (auto s : scripts_) {
            if (s == code) return true;
        }
        return false;
    }

    bool empty() const { return scripts_.empty() && !basic_latin_; }

private:
    std::vector<UScriptCode> scripts_;
    bool basic_latin_ = false;
};

inline std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

/// Trims Unicode whitespace (including U+3000 and NBSP).
inline std::string trim_unicode(std::string_view s) {
    auto cps = decode(s);
    size_t b = 0;
    size_t e = cps.size();
    while (b < e && is_space(cps[b])) ++b;
    while (e > b && is_space(cps[e - 1])) --e;
    return encode(std::u32string_view(cps).substr(b, e - b));
}

}  // namespace turnkit::unicode
