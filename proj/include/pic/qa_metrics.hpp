#pragma once

#include <string>
#include <vector>

namespace pic {

// SQuAD-style normalization: lowercase, strip ASCII punctuation, drop the
// whole-word articles a/an/the, collapse whitespace.
std::string normalize_answer(const std::string& s);

// Share of gold alias groups covered: a group counts once its normalized
// alias occurs as a substring of the normalized response. `answer_groups`
// must be non-empty.
double em_recall(const std::string& response,
                 const std::vector<std::vector<std::string>>& answer_groups);

struct QampariScore {
    size_t correct = 0; // predictions matched to distinct gold groups
    size_t covered = 0; // gold groups matched (== correct)
    double precision = 0.0;   // correct / |predicted|, 0 when nothing predicted
    double recall_at_k = 0.0; // min(1, covered / min(k, |gold|))
    double f1_at_k = 0.0;     // harmonic; 0 when either side is 0
};

// Normalized exact match against alias groups, each group creditable once
// (maximum bipartite matching between predictions and groups).
QampariScore qampari_metrics(const std::vector<std::string>& predicted,
                             const std::vector<std::vector<std::string>>& gold_groups, int k = 5);

// Splits a model response into individual answers: numbered/bulleted lines
// and comma-separated runs, trimmed, trailing periods stripped.
std::vector<std::string> parse_answer_list(const std::string& text);

} // namespace pic
