#pragma once

// Seeded synthetic fixtures. All randomness comes from SplitMix64, so a seed produces
// the same bytes on every platform.

#include <cstdint>
#include <vector>

#include "tpf/backend/reference.hpp"
#include "tpf/eval/evaluation.hpp"

namespace tpf::eval {

/// Template-built source documents, each with one sentence ending in an original term
/// from the swap table; the suspect is the source with that term replaced by its
/// tortured form. Throws Fixture when a tortured phrase has fewer than two words or its
/// first word occurs in any generated source (it would then not read as anomalous).
std::vector<AnnotatedPair> generate_planted_pairs(std::uint64_t seed, std::size_t count,
                                                  const std::vector<backend::SwapEntry>& swaps);

/// Original documents from the same templates; the spun copy replaces round(f * W)
/// words of every sentence with words outside the original vocabulary.
std::vector<ParallelDocPair> generate_parallel_pairs(std::uint64_t seed, std::size_t count, double swap_fraction,
                                                     std::size_t sentences_per_doc = 8);

}  // namespace tpf::eval
