#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diffwarn/graph.hpp"

namespace diffwarn::signal {

// One site mention: timestamp in seconds, site label, and the blog-graph
// vertex it resolves to (-1 until resolved / when unresolvable).
struct Mention {
    double t_seconds = 0.0;
    std::string site;
    std::int64_t vertex = -1;
};

struct EventTimeSeries {
    std::string id;
    std::optional<bool> alarming;  // label passthrough
    std::vector<Mention> mentions;  // sorted by time, stable for ties
    std::size_t unresolved = 0;     // mentions without a graph vertex

    double trigger_time() const;  // first mention timestamp; 0 if empty
};

// File format: `#event <id> [alarming|not_alarming]` header, then
// `t_seconds<TAB>site_label` lines. `#` lines are comments. A header with no
// following mentions is an error.
EventTimeSeries parse_event_series(const std::filesystem::path& path);
EventTimeSeries parse_event_series_text(const std::string& text);
std::string event_series_text(const EventTimeSeries& series);

// Fills Mention::vertex against the graph's vertex labels; unresolvable
// mentions keep -1 and are counted.
void resolve_sites(EventTimeSeries& series, const net::Graph& g);

struct BlogGraphSeries {
    double interval_hours = 0.0;
    std::vector<std::vector<net::Vertex>> active;  // per interval, sorted vertex ids
};

// vertex active in interval k iff it received a mention with
// floor((t - trigger)/interval) == k
BlogGraphSeries activity_labels(const EventTimeSeries& series, const net::Graph& g,
                                double interval_hours,
                                std::optional<double> trigger_seconds = {});

// cumulative mention count in [trigger, trigger + tau_hours]
std::size_t posts_count(const EventTimeSeries& series, double tau_hours,
                        std::optional<double> trigger_seconds = {});

// (posts(tau) - posts(tau/2)) / (tau/2), in posts per hour
double post_rate(const EventTimeSeries& series, double tau_hours,
                 std::optional<double> trigger_seconds = {});

// distinct communities of the union graph touched by resolvable mentions in
// [trigger, trigger + tau]
std::size_t community_dispersion(const EventTimeSeries& series,
                                 const net::CommunityPartition& partition,
                                 double tau_hours,
                                 std::optional<double> trigger_seconds = {});

// distinct k_max-shell vertices active by tau
std::size_t k_core_count(const EventTimeSeries& series,
                         const net::KShellDecomposition& shells, double tau_hours,
                         std::optional<double> trigger_seconds = {});

// Shannon entropy (nats) of the per-community distribution of resolvable
// posts inside interval `interval_index`; an empty interval scores 0.
double blog_entropy(const EventTimeSeries& series,
                    const net::CommunityPartition& partition,
                    std::size_t interval_index, double interval_hours,
                    std::optional<double> trigger_seconds = {});

// Same entropy over all posts in [trigger, trigger + tau] (the cumulative
// form used in the feature vector).
double blog_entropy_cumulative(const EventTimeSeries& series,
                               const net::CommunityPartition& partition,
                               double tau_hours,
                               std::optional<double> trigger_seconds = {});

struct Lexicon {
    std::string name;
    std::map<std::string, double> scores;
    double score_sum = 0.0;  // s^T 1 over the whole lexicon
};

// `word<TAB>score` lines; `#` comments
Lexicon parse_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon_text(const std::string& text, const std::string& name);

enum class ScoreNormalization {
    LexiconSum,   // s^T x / s^T 1, the displayed formula
    MatchedCount  // s^T x / (number of in-lexicon word occurrences)
};

// Aggregate lexicon score of a bag of words. Out-of-lexicon words score 0.
// LexiconSum rejects lexicons whose scores sum to 0 and points the caller at
// MatchedCount.
double lexicon_score(const std::map<std::string, std::size_t>& word_counts,
                     const Lexicon& lexicon,
                     ScoreNormalization norm = ScoreNormalization::LexiconSum);

// lowercase, split on non-alphanumerics
std::map<std::string, std::size_t> tokenize(const std::string& text);

struct FeatureVector {
    std::string event_id;
    double tau_hours = 0.0;
    std::size_t posts = 0;
    double post_rate = 0.0;
    std::size_t community_dispersion = 0;
    std::size_t k_core_count = 0;
    double blog_entropy = 0.0;                // nats, cumulative by tau
    std::vector<double> language_scores;      // one per lexicon, in given order
    std::optional<bool> alarming;

    std::vector<double> numeric(bool include_language = true) const;
};

// Step-4 assembly: all dynamics features at horizon tau, plus one language
// score per lexicon when a document is supplied.
FeatureVector extract_features(const EventTimeSeries& series,
                               const net::CommunityPartition& partition,
                               const net::KShellDecomposition& shells, double tau_hours,
                               const std::vector<Lexicon>& lexicons = {},
                               const std::optional<std::string>& document = {},
                               std::optional<double> trigger_seconds = {});

// fixed column order; language columns appear iff lexicon names are given
std::string features_csv_header(const std::vector<std::string>& lexicon_names);
std::string features_csv_row(const FeatureVector& f);

}  // namespace diffwarn::signal
