// Text forms: compact digit strings ("231") for n <= 9 and the general form
// "o2>o3>o1" for any n.
#pragma once

#include <cctype>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ttc_lab/core.hpp"

namespace ttc_lab {

enum class TextForm { Auto, Compact, General };

namespace detail {

inline std::vector<ObjectId> checked_permutation(const std::vector<std::pair<int, std::size_t>>& items) {
    const int n = static_cast<int>(items.size());
    std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
    std::vector<ObjectId> order;
    order.reserve(items.size());
    for (auto [idx, pos] : items) {
        if (idx < 1 || idx > n) {
            throw ParseError("object o" + std::to_string(idx) + " outside 1.." + std::to_string(n), pos);
        }
        if (seen[static_cast<std::size_t>(idx)]) {
            throw ParseError("duplicate object o" + std::to_string(idx), pos);
        }
        seen[static_cast<std::size_t>(idx)] = true;
        order.push_back(ObjectId{idx});
    }
    return order;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace detail

/// Parse "231" or "o2>o3>o1". With `expected_n`, the object count must match.
inline Preference parse_pref(std::string_view text, std::optional<int> expected_n = std::nullopt) {
    text = detail::trim(text);
    if (text.empty()) {
        throw ParseError("empty preference", 0);
    }
    std::vector<std::pair<int, std::size_t>> items;
    if (text.find('>') != std::string_view::npos || text.front() == 'o') {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t end = text.find('>', pos);
            if (end == std::string_view::npos) {
                end = text.size();
            }
            std::string_view tok = text.substr(pos, end - pos);
            std::size_t lead = 0;
            while (lead < tok.size() && std::isspace(static_cast<unsigned char>(tok[lead]))) {
                ++lead;
            }
            tok = detail::trim(tok);
            const std::size_t tok_pos = pos + lead;
            if (tok.size() < 2 || tok.front() != 'o') {
                throw ParseError("expected token of the form o<k>", tok_pos);
            }
            int value = 0;
            for (std::size_t i = 1; i < tok.size(); ++i) {
                if (!std::isdigit(static_cast<unsigned char>(tok[i]))) {
                    throw ParseError("non-digit in object index", tok_pos + i);
                }
                value = value * 10 + (tok[i] - '0');
                if (value > kMaxObjects) {
                    throw ParseError("object index too large", tok_pos);
                }
            }
            items.emplace_back(value, tok_pos);
            if (end == text.size()) {
                break;
            }
            pos = end + 1;
        }
    } else {
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
                throw ParseError("unexpected character '" + std::string(1, text[i]) + "'", i);
            }
        }
        if (text.size() > 9) {
            throw FormatError("compact form is limited to n <= 9; use o1>o2>... instead");
        }
        for (std::size_t i = 0; i < text.size(); ++i) {
            items.emplace_back(text[i] - '0', i);
        }
    }
    Preference p(detail::checked_permutation(items));
    if (expected_n && p.size() != *expected_n) {
        throw ParseError("preference over " + std::to_string(p.size()) + " objects, expected " +
                             std::to_string(*expected_n),
                         0);
    }
    return p;
}

inline std::string emit_pref(const Preference& p, TextForm form = TextForm::Auto) {
    if (form == TextForm::Compact && p.size() > 9) {
        throw FormatError("compact form is limited to n <= 9");
    }
    std::string out;
    if (form == TextForm::General || (form == TextForm::Auto && p.size() > 9)) {
        for (ObjectId o : p.order()) {
            if (!out.empty()) {
                out += '>';
            }
            out += 'o' + std::to_string(o.index);
        }
        return out;
    }
    for (ObjectId o : p.order()) {
        out += static_cast<char>('0' + o.index);
    }
    return out;
}

/// Allocation string: character i is the object assigned to agent i.
/// For n > 9 objects are written "o10,o2,...".
inline std::string emit_allocation(const Allocation& x) {
    std::string out;
    if (x.n() > 9) {
        for (ObjectId o : x.assignment()) {
            if (!out.empty()) {
                out += ',';
            }
            out += 'o' + std::to_string(o.index);
        }
        return out;
    }
    for (ObjectId o : x.assignment()) {
        out += static_cast<char>('0' + o.index);
    }
    return out;
}

inline Allocation parse_allocation(std::string_view text) {
    text = detail::trim(text);
    std::string as_pref(text);
    for (char& c : as_pref) {
        if (c == ',') {
            c = '>';
        }
    }
    try {
        Preference p = parse_pref(as_pref);
        return Allocation(std::vector<ObjectId>(p.order().begin(), p.order().end()));
    } catch (const ParseError& e) {
        throw ParseError("invalid allocation '" + std::string(text) + "'", e.position());
    }
}

/// Preferences separated by commas and/or whitespace.
inline Domain parse_domain(std::string_view text) {
    std::vector<Preference> prefs;
    std::size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && (text[pos] == ',' || std::isspace(static_cast<unsigned char>(text[pos])))) {
            ++pos;
        }
        std::size_t end = pos;
        while (end < text.size() && text[end] != ',' && !std::isspace(static_cast<unsigned char>(text[end]))) {
            ++end;
        }
        if (end > pos) {
            try {
                prefs.push_back(parse_pref(text.substr(pos, end - pos)));
            } catch (const ParseError& e) {
                throw ParseError("bad preference in domain", pos + e.position());
            }
        }
        pos = end;
    }
    return Domain(std::move(prefs));
}

inline std::string emit_domain(const Domain& d, TextForm form = TextForm::Auto) {
    std::string out;
    for (const Preference& p : d) {
        if (!out.empty()) {
            out += ',';
        }
        out += emit_pref(p, form);
    }
    return out;
}

inline std::string emit_profile(const Profile& p) {
    std::string out = "(";
    for (int i = 0; i < p.n(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += emit_pref(p[static_cast<std::size_t>(i)]);
    }
    return out + ")";
}

inline std::string to_string(ObjectId o) { return "o" + std::to_string(o.index); }

inline std::string to_string(SubsetO s) {
    std::string out = "{";
    for (ObjectId o : s.members()) {
        if (out.size() > 1) {
            out += ',';
        }
        out += to_string(o);
    }
    return out + "}";
}

inline std::ostream& operator<<(std::ostream& os, ObjectId o) { return os << to_string(o); }
inline std::ostream& operator<<(std::ostream& os, AgentId a) { return os << "agent " << a.index; }
inline std::ostream& operator<<(std::ostream& os, SubsetO s) { return os << to_string(s); }
inline std::ostream& operator<<(std::ostream& os, const Preference& p) { return os << emit_pref(p); }
inline std::ostream& operator<<(std::ostream& os, const Domain& d) { return os << "{" << emit_domain(d) << "}"; }
inline std::ostream& operator<<(std::ostream& os, const Profile& p) { return os << emit_profile(p); }
inline std::ostream& operator<<(std::ostream& os, const Allocation& x) { return os << emit_allocation(x); }

}  // namespace ttc_lab
