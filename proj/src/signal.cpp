#include "diffwarn/signal.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "diffwarn/csv.hpp"

namespace diffwarn::signal {

double EventTimeSeries::trigger_time() const {
    return mentions.empty() ? 0.0 : mentions.front().t_seconds;
}

EventTimeSeries parse_event_series_text(const std::string& text) {
    EventTimeSeries series;
    bool have_header = false;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            hs >> key;
            if (key == "event") {
                if (!(hs >> series.id))
                    throw ParseError("event header missing id", lineno);
                std::string label;
                if (hs >> label) {
                    if (label == "alarming") series.alarming = true;
                    else if (label == "not_alarming") series.alarming = false;
                    else throw ParseError("unknown event label: " + label, lineno);
                }
                have_header = true;
            }
            continue;
        }
        std::istringstream ls(line);
        Mention m;
        if (!(ls >> m.t_seconds >> m.site))
            throw ParseError("bad mention line: " + line, lineno);
        if (!std::isfinite(m.t_seconds))
            throw ParseError("non-finite timestamp", lineno);
        series.mentions.push_back(std::move(m));
    }
    if (!have_header) throw ParseError("missing #event header", 0);
    if (series.mentions.empty())
        throw ParseError("event " + series.id + " has no mentions", 0);
    std::stable_sort(series.mentions.begin(), series.mentions.end(),
                     [](const Mention& a, const Mention& b) {
                         return a.t_seconds < b.t_seconds;
                     });
    return series;
}

EventTimeSeries parse_event_series(const std::filesystem::path& path) {
    return parse_event_series_text(read_text_file(path));
}

std::string event_series_text(const EventTimeSeries& series) {
    std::string out = "#event " + series.id;
    if (series.alarming) out += *series.alarming ? " alarming" : " not_alarming";
    out += "\n";
    for (const auto& m : series.mentions)
        out += fmt_double(m.t_seconds) + "\t" + m.site + "\n";
    return out;
}

void resolve_sites(EventTimeSeries& series, const net::Graph& g) {
    series.unresolved = 0;
    for (auto& m : series.mentions) {
        const auto v = g.vertex_of(m.site);
        m.vertex = v ? static_cast<std::int64_t>(*v) : -1;
        if (!v) ++series.unresolved;
    }
}

namespace {

double trigger_of(const EventTimeSeries& series, std::optional<double> trigger) {
    return trigger ? *trigger : series.trigger_time();
}

constexpr double kSecondsPerHour = 3600.0;

}  // namespace

BlogGraphSeries activity_labels(const EventTimeSeries& series, const net::Graph& g,
                                double interval_hours,
                                std::optional<double> trigger_seconds) {
    if (!(interval_hours > 0.0))
        throw std::invalid_argument("activity_labels: interval must be > 0");
    BlogGraphSeries out;
    out.interval_hours = interval_hours;
    const double t0 = trigger_of(series, trigger_seconds);
    std::vector<std::set<net::Vertex>> buckets;
    for (const auto& m : series.mentions) {
        if (m.vertex < 0 || m.t_seconds < t0) continue;
        const auto k = static_cast<std::size_t>(
            (m.t_seconds - t0) / (interval_hours * kSecondsPerHour));
        if (buckets.size() <= k) buckets.resize(k + 1);
        if (static_cast<std::size_t>(m.vertex) < g.vertex_count())
            buckets[k].insert(static_cast<net::Vertex>(m.vertex));
    }
    for (auto& b : buckets) out.active.emplace_back(b.begin(), b.end());
    return out;
}

std::size_t posts_count(const EventTimeSeries& series, double tau_hours,
                        std::optional<double> trigger_seconds) {
    if (!(tau_hours > 0.0)) throw std::invalid_argument("posts_count: tau must be > 0");
    const double t0 = trigger_of(series, trigger_seconds);
    const double cutoff = t0 + tau_hours * kSecondsPerHour;
    std::size_t count = 0;
    for (const auto& m : series.mentions)
        if (m.t_seconds >= t0 && m.t_seconds <= cutoff) ++count;
    return count;
}

double post_rate(const EventTimeSeries& series, double tau_hours,
                 std::optional<double> trigger_seconds) {
    const double full = static_cast<double>(posts_count(series, tau_hours, trigger_seconds));
    const double half =
        static_cast<double>(posts_count(series, tau_hours / 2.0, trigger_seconds));
    return (full - half) / (tau_hours / 2.0);
}

std::size_t community_dispersion(const EventTimeSeries& series,
                                 const net::CommunityPartition& partition,
                                 double tau_hours,
                                 std::optional<double> trigger_seconds) {
    const double t0 = trigger_of(series, trigger_seconds);
    const double cutoff = t0 + tau_hours * kSecondsPerHour;
    std::set<net::Vertex> touched;
    for (const auto& m : series.mentions) {
        if (m.vertex < 0 || m.t_seconds < t0 || m.t_seconds > cutoff) continue;
        if (static_cast<std::size_t>(m.vertex) < partition.assignment.size())
            touched.insert(partition.assignment[m.vertex]);
    }
    return touched.size();
}

std::size_t k_core_count(const EventTimeSeries& series,
                         const net::KShellDecomposition& shells, double tau_hours,
                         std::optional<double> trigger_seconds) {
    const double t0 = trigger_of(series, trigger_seconds);
    const double cutoff = t0 + tau_hours * kSecondsPerHour;
    std::set<std::int64_t> core_sites;
    for (const auto& m : series.mentions) {
        if (m.vertex < 0 || m.t_seconds < t0 || m.t_seconds > cutoff) continue;
        if (static_cast<std::size_t>(m.vertex) < shells.shell_index.size() &&
            shells.shell_index[m.vertex] == shells.k_max)
            core_sites.insert(m.vertex);
    }
    return core_sites.size();
}

namespace {

double entropy_of_counts(const std::map<net::Vertex, std::size_t>& counts) {
    double total = 0.0;
    for (const auto& [c, n] : counts) total += static_cast<double>(n);
    if (total == 0.0) return 0.0;
    double h = 0.0;
    for (const auto& [c, n] : counts) {
        const double f = static_cast<double>(n) / total;
        if (f > 0.0) h -= f * std::log(f);
    }
    return h;
}

}  // namespace

double blog_entropy(const EventTimeSeries& series,
                    const net::CommunityPartition& partition,
                    std::size_t interval_index, double interval_hours,
                    std::optional<double> trigger_seconds) {
    if (!(interval_hours > 0.0))
        throw std::invalid_argument("blog_entropy: interval must be > 0");
    const double t0 = trigger_of(series, trigger_seconds);
    const double lo = t0 + interval_index * interval_hours * kSecondsPerHour;
    const double hi = lo + interval_hours * kSecondsPerHour;
    std::map<net::Vertex, std::size_t> counts;
    for (const auto& m : series.mentions) {
        if (m.vertex < 0 || m.t_seconds < lo || m.t_seconds >= hi) continue;
        if (static_cast<std::size_t>(m.vertex) < partition.assignment.size())
            ++counts[partition.assignment[m.vertex]];
    }
    return entropy_of_counts(counts);
}

double blog_entropy_cumulative(const EventTimeSeries& series,
                               const net::CommunityPartition& partition,
                               double tau_hours,
                               std::optional<double> trigger_seconds) {
    const double t0 = trigger_of(series, trigger_seconds);
    const double cutoff = t0 + tau_hours * kSecondsPerHour;
    std::map<net::Vertex, std::size_t> counts;
    for (const auto& m : series.mentions) {
        if (m.vertex < 0 || m.t_seconds < t0 || m.t_seconds > cutoff) continue;
        if (static_cast<std::size_t>(m.vertex) < partition.assignment.size())
            ++counts[partition.assignment[m.vertex]];
    }
    return entropy_of_counts(counts);
}

Lexicon parse_lexicon_text(const std::string& text, const std::string& name) {
    Lexicon lex;
    lex.name = name;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string word;
        double score;
        if (!(ls >> word >> score) || !std::isfinite(score))
            throw ParseError("bad lexicon line: " + line, lineno);
        lex.scores[word] = score;
    }
    if (lex.scores.empty()) throw ParseError("empty lexicon: " + name, 0);
    for (const auto& [w, s] : lex.scores) lex.score_sum += s;
    return lex;
}

Lexicon parse_lexicon(const std::filesystem::path& path) {
    return parse_lexicon_text(read_text_file(path), path.stem().string());
}

double lexicon_score(const std::map<std::string, std::size_t>& word_counts,
                     const Lexicon& lexicon, ScoreNormalization norm) {
    if (lexicon.scores.empty()) throw std::invalid_argument("lexicon_score: empty lexicon");
    double dot = 0.0;
    double matched = 0.0;
    for (const auto& [word, count] : word_counts) {
        const auto it = lexicon.scores.find(word);
        if (it == lexicon.scores.end()) continue;
        dot += it->second * static_cast<double>(count);
        matched += static_cast<double>(count);
    }
    if (norm == ScoreNormalization::LexiconSum) {
        if (lexicon.score_sum == 0.0)
            throw std::invalid_argument(
                "lexicon_score: lexicon scores sum to 0; use the matched-count "
                "normalization for signed lexicons");
        return dot / lexicon.score_sum;
    }
    return matched > 0.0 ? dot / matched : 0.0;
}

std::map<std::string, std::size_t> tokenize(const std::string& text) {
    std::map<std::string, std::size_t> counts;
    std::string word;
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            word += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        } else if (!word.empty()) {
            ++counts[word];
            word.clear();
        }
    }
    if (!word.empty()) ++counts[word];
    return counts;
}

std::vector<double> FeatureVector::numeric(bool include_language) const {
    std::vector<double> v = {static_cast<double>(posts), post_rate,
                             static_cast<double>(community_dispersion),
                             static_cast<double>(k_core_count), blog_entropy};
    if (include_language)
        v.insert(v.end(), language_scores.begin(), language_scores.end());
    return v;
}

FeatureVector extract_features(const EventTimeSeries& series,
                               const net::CommunityPartition& partition,
                               const net::KShellDecomposition& shells, double tau_hours,
                               const std::vector<Lexicon>& lexicons,
                               const std::optional<std::string>& document,
                               std::optional<double> trigger_seconds) {
    FeatureVector f;
    f.event_id = series.id;
    f.tau_hours = tau_hours;
    f.alarming = series.alarming;
    f.posts = posts_count(series, tau_hours, trigger_seconds);
    f.post_rate = post_rate(series, tau_hours, trigger_seconds);
    f.community_dispersion =
        community_dispersion(series, partition, tau_hours, trigger_seconds);
    f.k_core_count = k_core_count(series, shells, tau_hours, trigger_seconds);
    f.blog_entropy =
        blog_entropy_cumulative(series, partition, tau_hours, trigger_seconds);
    if (document) {
        const auto words = tokenize(*document);
        for (const auto& lex : lexicons)
            f.language_scores.push_back(lexicon_score(words, lex));
    }
    return f;
}

std::string features_csv_header(const std::vector<std::string>& lexicon_names) {
    std::string h =
        "event_id,tau_hours,posts,post_rate,community_dispersion,k_core_count,blog_entropy";
    for (const auto& name : lexicon_names) h += ",score_" + name;
    h += ",label\n";
    return h;
}

std::string features_csv_row(const FeatureVector& f) {
    std::string row = f.event_id + "," + fmt_double(f.tau_hours) + "," +
                      fmt_int(static_cast<long long>(f.posts)) + "," +
                      fmt_double(f.post_rate) + "," +
                      fmt_int(static_cast<long long>(f.community_dispersion)) + "," +
                      fmt_int(static_cast<long long>(f.k_core_count)) + "," +
                      fmt_double(f.blog_entropy);
    for (double s : f.language_scores) row += "," + fmt_double(s);
    row += ",";
    if (f.alarming) row += *f.alarming ? "alarming" : "not_alarming";
    row += "\n";
    return row;
}

}  // namespace diffwarn::signal
