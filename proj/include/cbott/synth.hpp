#pragma once

#include "cbott/config.hpp"
#include "cbott/ingest.hpp"

#include <cstdint>

namespace cbott {

// Deterministic synthetic process-audit corpus: per host, tasks drawn from
// weighted command-template scenarios at timestamps concentrated in the
// business-hour window, with intra-task gaps < delta and inter-task gaps
// > delta. Hosts share scenario cores but differ in slot values (users,
// apps, host tags), so cross-host tasks are similar without being
// duplicates.
Corpus generate_synthetic_corpus(const SynthesisConfig& spec, double delta, std::uint64_t seed);

}  // namespace cbott
