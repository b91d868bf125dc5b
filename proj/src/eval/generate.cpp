#include "tpf/eval/generate.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "tpf/error.hpp"
#include "tpf/hash.hpp"
#include "tpf/text/textmodel.hpp"

namespace tpf::eval {

namespace {

constexpr const char* kSubjects[] = {
    "The proposed method",   "Our experiment",        "This analysis",        "The baseline model",
    "A second study",        "The evaluation protocol", "The survey",         "Each participant group",
    "The control condition", "The final prototype",   "The pilot deployment", "The reference implementation",
};
constexpr const char* kVerbs[] = {
    "improves", "measures", "reduces", "compares", "reports", "extends", "examines", "stabilizes", "predicts",
    "summarizes",
};
constexpr const char* kObjects[] = {
    "the accuracy of the system", "the overall runtime",         "the sample variance",
    "the response latency",       "the cost of annotation",      "the size of the training set",
    "the energy budget",          "the quality of the labels",   "the number of outliers",
    "the coverage of the benchmark", "the memory footprint",     "the margin of the estimate",
};
constexpr const char* kTails[] = {
    "across several benchmarks", "under controlled conditions", "for every participant",
    "in the final stage",        "over three independent runs", "at a moderate scale",
    "without manual tuning",     "during the second phase",     "for the held-out split",
    "within the allotted time",
};
// Each ends in a frequent function word so the term's left neighbour is well attested.
constexpr const char* kTargets[] = {
    "The proposed framework relies on %s.",
    "Our analysis is based on %s.",
    "Several recent studies focus on %s.",
    "The remaining experiments build on %s.",
    "This section reports results obtained with %s.",
    "The main contribution of this work is centred on %s.",
};
// Replacement words for spun copies; disjoint from the template vocabulary.
constexpr const char* kSpinWords[] = {
    "umbrella", "granite",  "lantern", "orchard", "velvet",  "harbor",  "meadow",  "pebble",  "thimble",
    "saddle",   "quarry",   "cobalt",  "fjord",   "juniper", "kettle",  "lagoon",  "mosaic",  "nectar",
    "obelisk",  "parsnip",  "quiver",  "ravine",  "sparrow", "tundra",  "walnut",  "yonder",  "zephyr",
    "anvil",    "bramble",  "cinder",  "dormouse", "ember",  "flannel", "gazebo",  "hammock", "ivory",
};

template <typename T, std::size_t N>
const T& pick(const T (&arr)[N], SplitMix64& rng) {
    return arr[rng.next_below(N)];
}

std::string filler_sentence(SplitMix64& rng) {
    std::string s = pick(kSubjects, rng);
    s += ' ';
    s += pick(kVerbs, rng);
    s += ' ';
    s += pick(kObjects, rng);
    s += ' ';
    s += pick(kTails, rng);
    s += '.';
    return s;
}

std::vector<std::string> distinct_fillers(SplitMix64& rng, std::size_t n) {
    std::set<std::string> seen;
    std::vector<std::string> out;
    while (out.size() < n) {
        std::string s = filler_sentence(rng);
        if (seen.insert(s).second) out.push_back(std::move(s));
    }
    return out;
}

std::string join(const std::vector<std::string>& sentences) {
    std::string out;
    for (const auto& s : sentences) {
        if (!out.empty()) out += ' ';
        out += s;
    }
    return out + "\n";
}

std::string format_target(const char* tmpl, const std::string& term) {
    const int n = std::snprintf(nullptr, 0, tmpl, term.c_str());
    std::string out(static_cast<std::size_t>(n) + 1, '\0');
    std::snprintf(out.data(), out.size(), tmpl, term.c_str());
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string pad_id(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%04zu", prefix, i);
    return buf;
}

}  // namespace

std::vector<AnnotatedPair> generate_planted_pairs(std::uint64_t seed, std::size_t count,
                                                  const std::vector<backend::SwapEntry>& swaps) {
    if (swaps.empty()) throw Error(ErrorKind::Fixture, "planted generation needs a non-empty swap table");
    for (const auto& s : swaps) {
        if (text::word_tokens(s.tortured).size() < 2) {
            throw Error(ErrorKind::Fixture, "tortured phrase '" + s.tortured + "' must have at least two words");
        }
    }

    SplitMix64 rng(seed);
    std::vector<AnnotatedPair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto& swap = swaps[rng.next_below(swaps.size())];
        auto sentences = distinct_fillers(rng, 5 + rng.next_below(3));
        const std::string target = format_target(pick(kTargets, rng), swap.original);
        const std::size_t at = rng.next_below(sentences.size() + 1);
        sentences.insert(sentences.begin() + static_cast<std::ptrdiff_t>(at), target);

        AnnotatedPair p;
        p.pair_id = pad_id("planted", i + 1);
        p.tortured_phrase = swap.tortured;
        p.expected_original = swap.original;
        p.source_context = join(sentences);
        std::string swapped = target;
        swapped.replace(swapped.rfind(swap.original), swap.original.size(), swap.tortured);
        p.tortured_sentence = swapped;
        sentences[at] = swapped;
        p.suspect_text = join(sentences);
        out.push_back(std::move(p));
    }

    std::set<std::string> vocab;
    for (const auto& p : out) {
        for (auto& t : text::word_tokens(p.source_context)) vocab.insert(std::move(t));
    }
    for (const auto& p : out) {
        const std::string first = text::word_tokens(p.tortured_phrase).front();
        if (vocab.count(first)) {
            throw Error(ErrorKind::Fixture, "tortured phrase '" + p.tortured_phrase + "' starts with '" + first +
                                                "', which occurs in the generated sources");
        }
    }
    return out;
}

std::vector<ParallelDocPair> generate_parallel_pairs(std::uint64_t seed, std::size_t count, double swap_fraction,
                                                     std::size_t sentences_per_doc) {
    if (!(swap_fraction >= 0.0 && swap_fraction <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "swap fraction must lie in [0, 1]");
    }
    if (sentences_per_doc == 0) throw Error(ErrorKind::InvalidArgument, "sentences_per_doc must be positive");

    SplitMix64 rng(seed);
    std::vector<ParallelDocPair> out;
    for (std::size_t i = 0; i < count; ++i) {
        const auto sentences = distinct_fillers(rng, sentences_per_doc);
        std::vector<std::string> spun;
        for (const auto& s : sentences) {
            std::vector<std::string> words;
            std::string body = s.substr(0, s.size() - 1);  // drop the period
            for (std::size_t pos = 0; pos < body.size();) {
                std::size_t sp = body.find(' ', pos);
                if (sp == std::string::npos) sp = body.size();
                words.push_back(body.substr(pos, sp - pos));
                pos = sp + 1;
            }
            const auto k = static_cast<std::size_t>(std::lround(swap_fraction * static_cast<double>(words.size())));
            std::vector<std::size_t> positions(words.size());
            for (std::size_t j = 0; j < positions.size(); ++j) positions[j] = j;
            for (std::size_t j = 0; j < k; ++j) {
                std::swap(positions[j], positions[j + rng.next_below(positions.size() - j)]);
                std::string w = pick(kSpinWords, rng);
                if (positions[j] == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
                words[positions[j]] = w;
            }
            std::string rebuilt;
            for (const auto& w : words) rebuilt += (rebuilt.empty() ? "" : " ") + w;
            spun.push_back(rebuilt + ".");
        }
        out.push_back({pad_id("pair", i + 1), join(sentences), join(spun)});
    }
    return out;
}

}  // namespace tpf::eval
