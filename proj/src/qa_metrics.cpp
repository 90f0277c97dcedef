#include "pic/qa_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "pic/errors.hpp"
#include "pic/util.hpp"

namespace pic {

namespace {

bool is_ascii_punct(char c) {
    static const std::string kPunct = R"(!"#$%&'()*+,-./:;<=>?@[\]^_`{|}~)";
    return kPunct.find(c) != std::string::npos;
}

} // namespace

std::string normalize_answer(const std::string& s) {
    std::string lowered;
    lowered.reserve(s.size());
    for (char c : s) {
        char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (!is_ascii_punct(lc)) lowered.push_back(lc);
    }
    std::string out;
    for (const auto& tok : split_ws_tokens(lowered)) {
        if (tok == "a" || tok == "an" || tok == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

double em_recall(const std::string& response,
                 const std::vector<std::vector<std::string>>& answer_groups) {
    if (answer_groups.empty()) throw PreconditionError("em_recall: no answer groups");
    std::string resp_norm = normalize_answer(response);
    size_t covered = 0;
    for (const auto& group : answer_groups) {
        for (const auto& alias : group) {
            std::string a = normalize_answer(alias);
            if (!a.empty() && resp_norm.find(a) != std::string::npos) {
                ++covered;
                break;
            }
        }
    }
    return static_cast<double>(covered) / static_cast<double>(answer_groups.size());
}

QampariScore qampari_metrics(const std::vector<std::string>& predicted,
                             const std::vector<std::vector<std::string>>& gold_groups, int k) {
    if (gold_groups.empty()) throw PreconditionError("qampari_metrics: no gold groups");
    if (k < 1) throw PreconditionError("qampari_metrics: k must be >= 1");

    std::vector<std::vector<size_t>> adj(predicted.size());
    std::vector<std::vector<std::string>> gold_norm(gold_groups.size());
    for (size_t g = 0; g < gold_groups.size(); ++g) {
        for (const auto& alias : gold_groups[g]) {
            std::string a = normalize_answer(alias);
            if (!a.empty()) gold_norm[g].push_back(std::move(a));
        }
    }
    for (size_t p = 0; p < predicted.size(); ++p) {
        std::string pn = normalize_answer(predicted[p]);
        if (pn.empty()) continue;
        for (size_t g = 0; g < gold_groups.size(); ++g) {
            if (std::find(gold_norm[g].begin(), gold_norm[g].end(), pn) != gold_norm[g].end())
                adj[p].push_back(g);
        }
    }

    // Kuhn's augmenting paths; every gold group can absorb at most one
    // prediction, so duplicates cost precision.
    std::vector<int> group_match(gold_groups.size(), -1);
    std::function<bool(size_t, std::vector<bool>&)> try_match = [&](size_t p,
                                                                    std::vector<bool>& visited) {
        for (size_t g : adj[p]) {
            if (visited[g]) continue;
            visited[g] = true;
            if (group_match[g] < 0 ||
                try_match(static_cast<size_t>(group_match[g]), visited)) {
                group_match[g] = static_cast<int>(p);
                return true;
            }
        }
        return false;
    };
    size_t matched = 0;
    for (size_t p = 0; p < predicted.size(); ++p) {
        std::vector<bool> visited(gold_groups.size(), false);
        if (try_match(p, visited)) ++matched;
    }

    QampariScore score;
    score.correct = matched;
    score.covered = matched;
    score.precision = predicted.empty()
                          ? 0.0
                          : static_cast<double>(matched) / static_cast<double>(predicted.size());
    double denom = static_cast<double>(
        std::min<size_t>(static_cast<size_t>(k), gold_groups.size()));
    score.recall_at_k = std::min(1.0, static_cast<double>(matched) / denom);
    if (score.precision > 0.0 && score.recall_at_k > 0.0) {
        score.f1_at_k =
            2.0 * score.precision * score.recall_at_k / (score.precision + score.recall_at_k);
    }
    return score;
}

std::vector<std::string> parse_answer_list(const std::string& text) {
    std::vector<std::string> answers;
    for (const auto& raw : split_lines(text)) {
        std::string line = trim(raw);
        if (line.empty()) continue;
        // Strip "N." / "N)" numbering and "- " bullets.
        size_t i = 0;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
            line = trim(line.substr(i + 1));
        } else if (line.rfind("- ", 0) == 0) {
            line = trim(line.substr(2));
        }
        size_t start = 0;
        while (start <= line.size()) {
            size_t comma = line.find(',', start);
            std::string item = comma == std::string::npos
                                   ? line.substr(start)
                                   : line.substr(start, comma - start);
            item = trim(item);
            while (!item.empty() && item.back() == '.') item.pop_back();
            item = trim(item);
            if (!item.empty()) answers.push_back(item);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    return answers;
}

} // namespace pic
