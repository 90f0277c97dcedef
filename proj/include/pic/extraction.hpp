#pragma once

#include <string>
#include <vector>

#include "pic/claims.hpp"
#include "pic/gateway.hpp"
#include "pic/prompts.hpp"

namespace pic {

struct SentenceSpan {
    std::string text;
    size_t begin = 0; // offsets into the original text
    size_t end = 0;
};

// Rule-based splitter: terminal punctuation, an abbreviation blocklist, no
// splits inside quotes or brackets. Sentences keep their inner bytes exactly;
// only inter-sentence whitespace is dropped.
std::vector<SentenceSpan> segment_with_spans(const std::string& text);
std::vector<std::string> segment_sentences(const std::string& text);

struct ExtractionWindow {
    std::string prev;  // empty at the document edges
    std::string focus;
    std::string next;
    TextSpan focus_span;
};

// One window per sentence, in order.
std::vector<ExtractionWindow> make_windows(const std::vector<SentenceSpan>& sentences);

struct ExtractOptions {
    std::string prompt_template = std::string(prompts::kExtractionTemplate);
    size_t max_parallel = 8;
};

struct ExtractionResult {
    ClaimSet claims; // provenance response_extracted unless overridden later
    std::vector<std::string> warnings;
    size_t windows = 0;
};

// Windowed LLM extraction: one completion call per window, line-per-claim
// parsing, union-dedup across windows in sentence order. A window that fails
// or yields nothing parseable contributes zero claims and a warning; the
// batch never aborts on one window.
ExtractionResult extract_claims(Gateway& gateway, const std::string& extractor_profile,
                                const std::string& text, const ExtractOptions& options = {});

// Line-per-claim parsing shared with tests: strips an optional "- " bullet,
// drops lines under three words, treats "None" as no claims.
std::vector<std::string> parse_claim_lines(const std::string& completion);

} // namespace pic
