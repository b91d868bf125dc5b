#include "tpf/eval/smart_match.hpp"

#include <sstream>
#include <vector>

#include "tpf/text/textmodel.hpp"

namespace tpf::eval {

namespace {

std::vector<std::string> words_of(std::string_view normalized) {
    std::vector<std::string> out;
    std::istringstream in{std::string(normalized)};
    for (std::string w; in >> w;) out.push_back(std::move(w));
    return out;
}

std::string fold_plural(std::string w) {
    if (w.size() > 3 && w.back() == 's' && w[w.size() - 2] != 's') w.pop_back();
    return w;
}

bool is_acronym_of(const std::vector<std::string>& shortform, const std::vector<std::string>& longform) {
    if (shortform.size() != 1 || longform.size() < 2) return false;
    std::string initials;
    for (const auto& w : longform) initials += w.front();
    // Plural folding is skipped on one-word acronyms of 3 letters or fewer, so compare
    // against both "svm" and "svms".
    return shortform[0] == initials || shortform[0] == initials + "s";
}

}  // namespace

std::string normalize_term(std::string_view term) {
    const text::Utf8Text t{std::string(text::lowercase(term))};
    std::string spaced;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const char32_t c = t[i];
        const bool keep = text::is_word_char(c) && c != U'-' && c != U'\'' && c != U'’' && c != U'‐' &&
                          c != U'‑';
        spaced += keep ? std::string(t.slice(i, i + 1)) : std::string(" ");
    }
    std::string out;
    for (const auto& w : words_of(spaced)) {
        if (!out.empty()) out += ' ';
        out += fold_plural(w);
    }
    return out;
}

bool smart_match(std::string_view restored, std::string_view gold) {
    const std::string a = normalize_term(restored);
    const std::string b = normalize_term(gold);
    if (a.empty() || b.empty()) return false;
    if (a == b) return true;
    const auto wa = words_of(a);
    const auto wb = words_of(b);
    return is_acronym_of(wa, wb) || is_acronym_of(wb, wa);
}

}  // namespace tpf::eval
