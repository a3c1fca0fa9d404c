#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cmlab/corpus/codemix.hpp"
#include "cmlab/corpus/lexicon.hpp"
#include "cmlab/corpus/stats.hpp"
#include "cmlab/corpus/types.hpp"

namespace cmlab::corpus {

/// What to do with an untagged token when no lexicon is given.
enum class MissingTags { Reject, Other };

/// JSONL corpus: one object per line,
///   {"tokens":[{"w":"...","t":"L1"|"L2"|"O"}, ...], "label":"...", "target":"..."}
/// "t", "label" and "target" are optional. Untagged tokens are tagged with
/// `lexicon`; without one they fail the read or become OTHER, per
/// `missing`. Blank lines are skipped. Errors carry the 1-based line number.
std::vector<Utterance> read_corpus(std::istream& in, const Lexicon* lexicon = nullptr, const CmiWeights& weights = {},
                                   MissingTags missing = MissingTags::Reject);
std::vector<Utterance> load_corpus(const std::string& path, const Lexicon* lexicon = nullptr,
                                   const CmiWeights& weights = {}, MissingTags missing = MissingTags::Reject);

/// True if any token carries an L1 or L2 tag.
bool has_language_tags(std::span<const Utterance> corpus);

std::string utterance_to_json_line(const Utterance& u);
void write_corpus(std::ostream& os, std::span<const Utterance> corpus);

/// bucket,count,percent with mean/total/discard counts as leading '#' lines.
void write_histogram_csv(std::ostream& os, const CmiHistogram& histogram);

/// n,v,fit_v with the fit parameters as leading '#' lines.
void write_heaps_csv(std::ostream& os, const HeapsFit& fit, std::span<const HeapsSample> samples);

/// Fixed-point formatting used by every report.
std::string format_fixed(double value, int decimals);

}  // namespace cmlab::corpus
