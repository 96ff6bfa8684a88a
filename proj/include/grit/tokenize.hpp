#pragma once

#include <clocale>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>
#include <cwctype>

#include <locale.h>

namespace grit {

namespace detail {

/// UTF-8 aware character classes backed by the C.UTF-8 locale tables.
/// Falls back to "every non-ASCII code point is a letter" when the locale is
/// unavailable, so tokenization never depends on the process-global locale.
class UnicodeClasses {
  public:
    static UnicodeClasses const& instance()
    {
        static UnicodeClasses const classes;
        return classes;
    }

    [[nodiscard]] bool is_alnum(char32_t cp) const noexcept
    {
        if (cp < 0x80) {
            return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
        }
        if (m_locale == locale_t{}) {
            return true;
        }
        return ::iswalnum_l(static_cast<wint_t>(cp), m_locale) != 0;
    }

    [[nodiscard]] char32_t to_lower(char32_t cp) const noexcept
    {
        if (cp < 0x80) {
            return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
        }
        if (m_locale == locale_t{}) {
            return cp;
        }
        return static_cast<char32_t>(::towlower_l(static_cast<wint_t>(cp), m_locale));
    }

    UnicodeClasses(UnicodeClasses const&) = delete;
    UnicodeClasses& operator=(UnicodeClasses const&) = delete;

  private:
    UnicodeClasses()
    {
        for (char const* name : {"C.UTF-8", "C.utf8", "en_US.UTF-8"}) {
            m_locale = ::newlocale(LC_CTYPE_MASK, name, locale_t{});
            if (m_locale != locale_t{}) {
                break;
            }
        }
    }
    ~UnicodeClasses()
    {
        if (m_locale != locale_t{}) {
            ::freelocale(m_locale);
        }
    }

    locale_t m_locale{};
};

/// Decodes one code point starting at `i`, advancing `i`. Invalid bytes decode
/// to U+FFFD and consume a single byte.
inline char32_t next_code_point(std::string_view s, std::size_t& i) noexcept
{
    auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char lead = byte(i);
    if (lead < 0x80) {
        ++i;
        return lead;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((lead & 0xE0) == 0xC0) {
        len = 2;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        len = 3;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        len = 4;
        cp = lead & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + len > s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (std::size_t k = 1; k < len; ++k) {
        if ((byte(i + k) & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (byte(i + k) & 0x3F);
    }
    i += len;
    return cp;
}

inline void append_utf8(std::string& out, char32_t cp)
{
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

}  // namespace detail

/// Lowercased runs of Unicode letters and digits. Everything else separates
/// tokens. No stemming, no stopwords.
inline std::vector<std::string> tokenize(std::string_view text)
{
    auto const& classes = detail::UnicodeClasses::instance();
    std::vector<std::string> tokens;
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        char32_t cp = detail::next_code_point(text, i);
        if (cp != 0xFFFD && classes.is_alnum(cp)) {
            detail::append_utf8(current, classes.to_lower(cp));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

}  // namespace grit
