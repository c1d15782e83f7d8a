#include "listrank/evalkit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "listrank/error.hpp"
#include "listrank/rng.hpp"

namespace listrank {

void RankingDataset::validate() const {
    std::set<std::string> query_ids;
    for (const QueryRecord& q : records) {
        if (!query_ids.insert(q.query_id).second) {
            throw ParseError("dataset: duplicate query_id \"" + q.query_id + "\"");
        }
        std::set<std::string> passage_ids;
        for (const PassageRecord& p : q.passages) {
            if (!passage_ids.insert(p.id).second) {
                throw ParseError("dataset: duplicate passage id \"" + p.id + "\" in query \"" +
                                 q.query_id + "\"");
            }
            if (p.label != 0 && p.label != 1) {
                throw ParseError("dataset: label must be 0 or 1 in query \"" + q.query_id +
                                 "\"");
            }
        }
    }
}

RankingDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open dataset: " + path.string());
    }
    RankingDataset out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        QueryRecord q;
        try {
            q.query_id = rec.at("query_id").get<std::string>();
            q.query = rec.at("query").get<std::string>();
            for (const auto& p : rec.at("passages")) {
                PassageRecord pr;
                pr.id = p.at("id").get<std::string>();
                pr.text = p.at("text").get<std::string>();
                pr.label = p.at("label").get<int>();
                q.passages.push_back(std::move(pr));
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        out.records.push_back(std::move(q));
    }
    out.validate();
    return out;
}

void save_dataset(const std::filesystem::path& path, const RankingDataset& dataset) {
    std::ofstream os(path);
    if (!os) {
        throw ParseError("cannot open dataset for writing: " + path.string());
    }
    for (const QueryRecord& q : dataset.records) {
        nlohmann::json passages = nlohmann::json::array();
        for (const PassageRecord& p : q.passages) {
            passages.push_back({{"id", p.id}, {"text", p.text}, {"label", p.label}});
        }
        const nlohmann::json rec = {
            {"query_id", q.query_id}, {"query", q.query}, {"passages", passages}};
        os << rec.dump() << "\n";
    }
}

std::optional<double> average_precision(const std::vector<std::size_t>& ranks,
                                        const std::vector<int>& labels) {
    if (ranks.size() != labels.size()) {
        throw PreconditionError("average_precision: " + std::to_string(ranks.size()) +
                                " ranks vs " + std::to_string(labels.size()) + " labels");
    }
    const std::size_t n = ranks.size();
    std::vector<int> label_at_rank(n + 1, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (ranks[i] < 1 || ranks[i] > n || label_at_rank[ranks[i]] != -1) {
            throw PreconditionError("average_precision: ranks are not a permutation of 1.." +
                                    std::to_string(n));
        }
        label_at_rank[ranks[i]] = labels[i];
    }
    std::size_t positives = 0;
    for (int l : labels) {
        positives += (l == 1);
    }
    if (positives == 0) {
        return std::nullopt;
    }
    double sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        if (label_at_rank[k] == 1) {
            ++seen;
            sum += static_cast<double>(seen) / static_cast<double>(k);
        }
    }
    return sum / static_cast<double>(positives);
}

EvalReport evaluate(const Engine& engine, const RankingDataset& dataset, const IterConfig& iter,
                    RankMode mode) {
    const auto t0 = std::chrono::steady_clock::now();
    EvalReport report;
    const bool pointwise = engine.config().feature_mode == FeatureMode::ORIGINAL_ONLY;
    const bool iterative = mode == RankMode::ITERATIVE && !pointwise;
    report.mode = mode == RankMode::ITERATIVE ? "iterative" : "direct";
    if (mode == RankMode::ITERATIVE && pointwise) {
        report.mode = "direct (iterative inference not applicable to original-only features)";
    }

    double total = 0.0;
    for (const QueryRecord& q : dataset.records) {
        if (q.passages.empty()) {
            ++report.skipped;
            continue;
        }
        std::vector<std::string> texts;
        std::vector<int> labels;
        texts.reserve(q.passages.size());
        for (const PassageRecord& p : q.passages) {
            texts.push_back(p.text);
            labels.push_back(p.label);
        }
        const RankedResult ranked = engine.rank_texts(q.query, texts, iterative, iter);
        std::vector<std::size_t> ranks(ranked.passages.size());
        for (std::size_t i = 0; i < ranked.passages.size(); ++i) {
            ranks[i] = ranked.passages[i].rank;
        }
        const std::optional<double> ap = average_precision(ranks, labels);
        if (!ap) {
            ++report.skipped;
            continue;
        }
        report.per_query.push_back(QueryEval{q.query_id, *ap, ranked.rounds});
        total += *ap;
    }
    report.map = report.per_query.empty() ? 0.0 : total / static_cast<double>(report.per_query.size());
    report.runtime_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

std::string report_to_json(const EvalReport& report) {
    nlohmann::json doc;
    doc["mode"] = report.mode;
    doc["mAP"] = report.map;
    doc["queries"] = report.per_query.size();
    doc["skipped"] = report.skipped;
    doc["runtime_sec"] = report.runtime_sec;
    nlohmann::json per_query = nlohmann::json::array();
    for (const QueryEval& q : report.per_query) {
        per_query.push_back({{"query_id", q.query_id}, {"ap", q.ap}, {"rounds", q.rounds}});
    }
    doc["per_query"] = per_query;
    if (!report.rows.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const AblationRow& row : report.rows) {
            nlohmann::json r;
            r["cell"] = row.cell;
            r["mAP_direct"] = row.map_direct;
            if (row.map_iterative) {
                r["mAP_iterative"] = *row.map_iterative;
            }
            if (!row.note.empty()) {
                r["note"] = row.note;
            }
            r["runtime_sec"] = row.runtime_sec;
            rows.push_back(std::move(r));
        }
        doc["rows"] = rows;
    }
    return doc.dump(2);
}

namespace {

std::string fixed6(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << v;
    return os.str();
}

} // namespace

std::string report_to_text(const EvalReport& report) {
    std::ostringstream os;
    os << "mode:    " << report.mode << "\n";
    os << "queries: " << report.per_query.size() << " (skipped " << report.skipped << ")\n";
    os << "mAP:     " << fixed6(report.map) << "\n";
    os << "runtime: " << fixed6(report.runtime_sec) << " s\n";
    if (!report.per_query.empty()) {
        std::size_t idw = std::string("query").size();
        for (const QueryEval& q : report.per_query) {
            idw = std::max(idw, q.query_id.size());
        }
        os << "\n" << std::left << std::setw(static_cast<int>(idw) + 2) << "query"
           << std::setw(10) << "AP" << "rounds\n";
        for (const QueryEval& q : report.per_query) {
            os << std::left << std::setw(static_cast<int>(idw) + 2) << q.query_id
               << std::setw(10) << fixed6(q.ap) << q.rounds << "\n";
        }
    }
    if (!report.rows.empty()) {
        os << "\n";
        std::size_t cellw = std::string("cell").size();
        std::vector<std::string> cells;
        for (const AblationRow& row : report.rows) {
            std::string cell;
            for (const auto& [axis, value] : row.cell) {
                if (!cell.empty()) {
                    cell += ", ";
                }
                cell += axis + "=" + value;
            }
            cells.push_back(cell);
            cellw = std::max(cellw, cell.size());
        }
        os << std::left << std::setw(static_cast<int>(cellw) + 2) << "cell" << std::setw(12)
           << "mAP(dir)" << std::setw(12) << "mAP(iter)" << "note\n";
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            const AblationRow& row = report.rows[i];
            os << std::left << std::setw(static_cast<int>(cellw) + 2) << cells[i]
               << std::setw(12) << fixed6(row.map_direct) << std::setw(12)
               << (row.map_iterative ? fixed6(*row.map_iterative) : std::string("-"))
               << row.note << "\n";
        }
    }
    return os.str();
}

namespace {

/// Topic vocabularies from disjoint-ish random syllable pools. Words inside a
/// topic share syllables, so their character trigrams overlap heavily; words
/// from different topics rarely collide.
struct TopicVocab {
    std::vector<std::string> words;
};

std::vector<TopicVocab> make_topics(Rng& rng, std::size_t n_topics) {
    std::vector<TopicVocab> topics(n_topics);
    for (TopicVocab& topic : topics) {
        std::vector<std::string> syllables;
        for (std::size_t s = 0; s < 10; ++s) {
            std::string syl;
            for (int k = 0; k < 3; ++k) {
                syl.push_back(static_cast<char>('a' + rng.index(26)));
            }
            syllables.push_back(std::move(syl));
        }
        for (std::size_t w = 0; w < 14; ++w) {
            std::string word;
            const std::size_t parts = 2 + rng.index(2);
            for (std::size_t p = 0; p < parts; ++p) {
                word += syllables[rng.index(syllables.size())];
            }
            topic.words.push_back(std::move(word));
        }
    }
    return topics;
}

std::string sample_text(Rng& rng, const TopicVocab& vocab, std::size_t n_words) {
    std::string text;
    for (std::size_t i = 0; i < n_words; ++i) {
        if (!text.empty()) {
            text += ' ';
        }
        text += vocab.words[rng.index(vocab.words.size())];
    }
    return text;
}

} // namespace

SynthResult synthesize_dataset(const SynthConfig& cfg) {
    if (cfg.n_topics < 2) {
        throw PreconditionError("synthesize_dataset: need at least 2 topics");
    }
    if (cfg.passages_per_query < 2) {
        throw PreconditionError("synthesize_dataset: need at least 2 passages per query");
    }
    Rng rng(cfg.seed);
    const std::vector<TopicVocab> topics = make_topics(rng, cfg.n_topics);

    SynthResult result;
    for (std::size_t qi = 0; qi < cfg.n_queries; ++qi) {
        const std::size_t topic = rng.index(cfg.n_topics);
        result.query_topics.push_back(topic);

        QueryRecord q;
        q.query_id = "q" + std::to_string(qi);
        q.query = sample_text(rng, topics[topic], 4);

        // Between a quarter and half of the group is positive; always at least
        // one positive and one negative.
        const std::size_t max_pos = cfg.passages_per_query / 2;
        const std::size_t min_pos = std::max<std::size_t>(1, cfg.passages_per_query / 4);
        const std::size_t n_pos = min_pos + rng.index(std::max<std::size_t>(1, max_pos - min_pos + 1));

        for (std::size_t pi = 0; pi < cfg.passages_per_query; ++pi) {
            PassageRecord p;
            p.id = q.query_id + "_p" + std::to_string(pi);
            if (pi < n_pos) {
                p.label = 1;
                p.text = sample_text(rng, topics[topic], 5);
                // Anchor one positive near the query wording.
                if (pi == 0) {
                    p.text = q.query + " " + sample_text(rng, topics[topic], 2);
                }
            } else {
                p.label = 0;
                std::size_t other = rng.index(cfg.n_topics - 1);
                if (other >= topic) {
                    ++other;
                }
                if (rng.uniform() < cfg.hard_negative_rate) {
                    // Hard negative: query-topic words blended into another
                    // topic, so pointwise surface overlap is misleading.
                    p.text = sample_text(rng, topics[topic], 2) + " " +
                             sample_text(rng, topics[other], 3);
                } else {
                    p.text = sample_text(rng, topics[other], 5);
                }
            }
            q.passages.push_back(std::move(p));
        }
        result.dataset.records.push_back(std::move(q));
    }
    result.dataset.validate();
    return result;
}

std::pair<RankingDataset, RankingDataset> split_dataset(const RankingDataset& dataset,
                                                        double eval_fraction,
                                                        std::uint64_t seed) {
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
        throw PreconditionError("split_dataset: eval fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> order(dataset.records.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    Rng rng(seed);
    rng.shuffle(order);
    const std::size_t n_eval = static_cast<std::size_t>(
        std::ceil(eval_fraction * static_cast<double>(dataset.records.size())));
    RankingDataset train, eval;
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_eval ? eval : train).records.push_back(dataset.records[order[i]]);
    }
    return {std::move(train), std::move(eval)};
}

} // namespace listrank
