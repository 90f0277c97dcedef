#include "pic/extraction.hpp"

#include <cctype>
#include <unordered_set>

#include "pic/errors.hpp"
#include "pic/util.hpp"

namespace pic {

namespace {

bool is_ws(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

const std::unordered_set<std::string>& abbreviation_blocklist() {
    static const std::unordered_set<std::string> kAbbrevs = {
        "Dr",   "Mr",  "Mrs",  "Ms",   "Prof", "Sr",   "Jr",   "St",   "Mt",  "Rev",
        "Gen",  "Sen", "Rep",  "Gov",  "Capt", "Col",  "Lt",   "Cmdr", "Hon", "Fr",
        "vs",   "etc", "cf",   "al",   "Inc",  "Ltd",  "Co",   "Corp", "Univ", "Dept",
        "Fig",  "Eq",  "No",   "Vol",  "pp",   "ed",   "eds",  "approx", "ca", "Ave",
        "Blvd", "Rd",  "Jan",  "Feb",  "Mar",  "Apr",  "Jun",  "Jul",  "Aug", "Sep",
        "Sept", "Oct", "Nov",  "Dec"};
    return kAbbrevs;
}

// Word immediately before position `dot` (exclusive), letters/dots/apostrophes
// only. "U.S" and "i.e" style tokens count as abbreviations via their inner dot.
bool abbreviation_before(const std::string& text, size_t dot) {
    size_t e = dot;
    size_t b = e;
    while (b > 0) {
        char c = text[b - 1];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '.' || c == '\'') {
            --b;
        } else {
            break;
        }
    }
    if (b == e) return false;
    std::string word = text.substr(b, e - b);
    while (!word.empty() && word.front() == '.') word.erase(word.begin());
    if (word.empty()) return false;
    if (word.find('.') != std::string::npos) return true;
    return abbreviation_blocklist().count(word) > 0;
}

} // namespace

std::vector<SentenceSpan> segment_with_spans(const std::string& text) {
    std::vector<SentenceSpan> out;
    const size_t n = text.size();
    size_t start = 0;
    int depth = 0;
    bool in_quote = false;

    auto flush = [&](size_t endpos) {
        size_t b = start, e = endpos;
        while (b < e && is_ws(text[b])) ++b;
        while (e > b && is_ws(text[e - 1])) --e;
        if (e > b) out.push_back({text.substr(b, e - b), b, e});
        start = endpos;
    };

    for (size_t i = 0; i < n; ++i) {
        char c = text[i];
        if (c == '(' || c == '[') {
            ++depth;
            continue;
        }
        if (c == ')' || c == ']') {
            if (depth > 0) --depth;
            continue;
        }
        if (c == '"') {
            in_quote = !in_quote;
            continue;
        }
        if (!is_terminal(c) || depth > 0) continue;

        if (in_quote) {
            // A terminator run directly followed by the closing quote ends the
            // sentence, unless the text continues in lowercase (the quotation
            // then sits mid-sentence). Other in-quote punctuation never splits.
            size_t j = i;
            while (j + 1 < n && is_terminal(text[j + 1])) ++j;
            if (j + 1 < n && text[j + 1] == '"' && (j + 2 >= n || is_ws(text[j + 2]))) {
                size_t next = j + 2;
                while (next < n && is_ws(text[next])) ++next;
                if (next >= n || !std::islower(static_cast<unsigned char>(text[next]))) {
                    in_quote = false;
                    i = j + 1;
                    flush(i + 1);
                }
            }
            continue;
        }

        if (c == '.') {
            if (i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1]))) continue;
            if (abbreviation_before(text, i)) continue;
        }

        size_t j = i;
        while (j + 1 < n && is_terminal(text[j + 1])) ++j;
        while (j + 1 < n &&
               (text[j + 1] == '"' || text[j + 1] == '\'' || text[j + 1] == ')' ||
                text[j + 1] == ']')) {
            if (text[j + 1] == '"') in_quote = !in_quote;
            if ((text[j + 1] == ')' || text[j + 1] == ']') && depth > 0) --depth;
            ++j;
        }
        if (j + 1 >= n || is_ws(text[j + 1])) {
            i = j;
            flush(i + 1);
        } else {
            i = j;
        }
    }
    flush(n);
    return out;
}

std::vector<std::string> segment_sentences(const std::string& text) {
    std::vector<std::string> out;
    for (auto& s : segment_with_spans(text)) out.push_back(std::move(s.text));
    return out;
}

std::vector<ExtractionWindow> make_windows(const std::vector<SentenceSpan>& sentences) {
    std::vector<ExtractionWindow> windows;
    windows.reserve(sentences.size());
    for (size_t i = 0; i < sentences.size(); ++i) {
        ExtractionWindow w;
        w.prev = i > 0 ? sentences[i - 1].text : std::string{};
        w.focus = sentences[i].text;
        w.next = i + 1 < sentences.size() ? sentences[i + 1].text : std::string{};
        w.focus_span = {sentences[i].begin, sentences[i].end};
        windows.push_back(std::move(w));
    }
    return windows;
}

std::vector<std::string> parse_claim_lines(const std::string& completion) {
    std::vector<std::string> claims;
    for (const auto& raw : split_lines(completion)) {
        std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.rfind("- ", 0) == 0) line = trim(line.substr(2));
        if (line.empty()) continue;
        if (starts_with_icase(line, "none") && count_words(line) == 1) continue;
        if (count_words(line) < 3) continue;
        claims.push_back(line);
    }
    return claims;
}

ExtractionResult extract_claims(Gateway& gateway, const std::string& extractor_profile,
                                const std::string& text, const ExtractOptions& options) {
    ExtractionResult result;
    auto sentences = segment_with_spans(text);
    auto windows = make_windows(sentences);
    result.windows = windows.size();
    if (windows.empty()) {
        result.claims.provenance = Provenance::response_extracted;
        return result;
    }

    struct WindowOut {
        std::vector<VerifiableClaim> claims;
        std::vector<std::string> warnings;
    };
    std::vector<WindowOut> outs(windows.size());

    parallel_for_indexed(windows.size(), options.max_parallel, [&](size_t i) {
        const auto& w = windows[i];
        std::string prompt = options.prompt_template;
        prompt = replace_all(std::move(prompt), "{prev}", w.prev.empty() ? "(none)" : w.prev);
        prompt = replace_all(std::move(prompt), "{focus}", w.focus);
        prompt = replace_all(std::move(prompt), "{next}", w.next.empty() ? "(none)" : w.next);

        std::string completion;
        try {
            completion = gateway.complete(extractor_profile, prompt).text;
        } catch (const RetryableError& e) {
            outs[i].warnings.push_back("window " + std::to_string(i) + ": " + e.what());
            return;
        } catch (const PermanentError& e) {
            outs[i].warnings.push_back("window " + std::to_string(i) + ": " + e.what());
            return;
        } catch (const ProtocolError& e) {
            outs[i].warnings.push_back("window " + std::to_string(i) + ": " + e.what());
            return;
        }

        auto lines = parse_claim_lines(completion);
        if (lines.empty()) {
            if (!starts_with_icase(trim(completion), "none")) {
                outs[i].warnings.push_back("window " + std::to_string(i) +
                                           ": no parseable claims in completion");
            }
            return;
        }
        size_t li = 0;
        for (auto& line : lines) {
            VerifiableClaim c;
            c.id = "w" + std::to_string(i) + "c" + std::to_string(li++);
            c.text = std::move(line);
            c.source = ClaimSource::extracted;
            c.span = w.focus_span;
            outs[i].claims.push_back(std::move(c));
        }
    });

    std::vector<VerifiableClaim> merged;
    for (auto& o : outs) {
        for (auto& c : o.claims) merged.push_back(std::move(c));
        for (auto& w : o.warnings) result.warnings.push_back(std::move(w));
    }
    result.claims = dedup_claims(merged, Provenance::response_extracted);
    return result;
}

} // namespace pic
