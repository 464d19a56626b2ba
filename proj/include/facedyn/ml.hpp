// Evaluation harness: feature matrix with row identity, variance and
// correlation filtering, standardization (training statistics only),
// permutation-importance backward elimination, random-split and
// leave-one-participant-out validation, and per-participant learning curves.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "facedyn/common.hpp"
#include "facedyn/csv.hpp"
#include "facedyn/forest.hpp"
#include "facedyn/metrics.hpp"
#include "facedyn/parallel.hpp"
#include "facedyn/rng.hpp"

namespace facedyn {

inline constexpr int kNumConditions = 3;

inline const std::array<std::string, 3>& condition_names() {
    static const std::array<std::string, 3> names = {"Low", "Moderate", "High"};
    return names;
}

inline int condition_index(const std::string& name) {
    for (int i = 0; i < kNumConditions; ++i)
        if (condition_names()[i] == name) return i;
    throw InvalidParams("unknown condition '" + name + "'");
}

struct FeatureRowMeta {
    std::string participant;
    std::string session;  // "baseline" or "experimental"
    int condition = 0;    // index into condition_names()
    std::size_t window_index = 0;
};

struct FeatureMatrix {
    std::vector<std::string> columns;
    std::vector<FeatureRowMeta> meta;
    std::vector<double> values;  // rows() x cols(), row-major

    std::size_t rows() const { return meta.size(); }
    std::size_t cols() const { return columns.size(); }
    double at(std::size_t r, std::size_t c) const {
        return values[r * cols() + c];
    }
    const double* row(std::size_t r) const { return values.data() + r * cols(); }

    void add_row(FeatureRowMeta m, const std::vector<double>& v) {
        if (v.size() != cols())
            throw InvalidParams("feature row width mismatch");
        meta.push_back(std::move(m));
        values.insert(values.end(), v.begin(), v.end());
    }

    std::vector<int> labels(const std::vector<std::size_t>& rows_idx) const {
        std::vector<int> out(rows_idx.size());
        for (std::size_t i = 0; i < rows_idx.size(); ++i)
            out[i] = meta[rows_idx[i]].condition;
        return out;
    }

    std::vector<std::size_t> all_rows() const {
        std::vector<std::size_t> out(rows());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
        return out;
    }

    std::vector<std::string> participants() const {
        std::vector<std::string> out;
        for (const auto& m : meta)
            if (std::find(out.begin(), out.end(), m.participant) == out.end())
                out.push_back(m.participant);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Feature CSV: participant,session,condition,window_index,<feature columns>.
// ---------------------------------------------------------------------------

inline void write_feature_matrix(const FeatureMatrix& M, const std::string& path) {
    csv::Writer w(path);
    std::vector<std::string> header = {"participant", "session", "condition",
                                       "window_index"};
    header.insert(header.end(), M.columns.begin(), M.columns.end());
    w.row(header);
    for (std::size_t r = 0; r < M.rows(); ++r) {
        std::vector<std::string> fields = {
            M.meta[r].participant, M.meta[r].session,
            condition_names()[M.meta[r].condition],
            std::to_string(M.meta[r].window_index)};
        for (std::size_t c = 0; c < M.cols(); ++c)
            fields.push_back(csv::format_number(M.at(r, c)));
        w.row(fields);
    }
}

// Rows containing any missing value are dropped (counted in *dropped_rows).
inline FeatureMatrix read_feature_matrix(const std::string& path,
                                         std::size_t* dropped_rows = nullptr) {
    csv::Table tbl = csv::read_file(path);
    if (tbl.header.size() < 5 || tbl.header[0] != "participant" ||
        tbl.header[1] != "session" || tbl.header[2] != "condition" ||
        tbl.header[3] != "window_index")
        throw MalformedRow(path + ": bad feature-matrix header");
    FeatureMatrix M;
    M.columns.assign(tbl.header.begin() + 4, tbl.header.end());
    std::size_t dropped = 0;
    for (std::size_t r = 0; r < tbl.rows.size(); ++r) {
        const auto& row = tbl.rows[r];
        if (row.size() != tbl.header.size())
            throw MalformedRow(path + " row " + std::to_string(r + 2) +
                               ": field count mismatch");
        FeatureRowMeta m;
        m.participant = row[0];
        m.session = row[1];
        m.condition = condition_index(row[2]);
        m.window_index =
            static_cast<std::size_t>(csv::parse_number(row[3]));
        std::vector<double> v(M.cols());
        bool ok = true;
        for (std::size_t c = 0; c < M.cols(); ++c) {
            v[c] = csv::parse_number(row[4 + c]);
            if (is_missing(v[c])) ok = false;
        }
        if (!ok) {
            ++dropped;
            continue;
        }
        M.add_row(std::move(m), v);
    }
    if (dropped_rows) *dropped_rows = dropped;
    return M;
}

// ---------------------------------------------------------------------------
// Filtering.
// ---------------------------------------------------------------------------

struct FeatureSelectConfig {
    double var_threshold = 1e-8;
    double corr_threshold = 0.95;
    double elim_fraction = 0.20;
    int min_features = 5;
    int perm_repeats = 3;
    int cv_folds = 5;
    double stop_tolerance = 0.005;  // balanced-accuracy points (0.5 pt)

    void validate() const {
        if (var_threshold <= 0.0 || corr_threshold <= 0.0)
            throw InvalidParams("thresholds must be positive");
        if (elim_fraction <= 0.0 || elim_fraction >= 1.0)
            throw InvalidParams("elim_fraction must be in (0,1)");
        if (min_features < 1 || perm_repeats < 1 || cv_folds < 2)
            throw InvalidParams("bad selection config");
    }
};

struct FilterLog {
    std::vector<std::string> dropped_low_variance;
    std::vector<std::pair<std::string, std::string>> dropped_correlated;  // (dropped, kept)
};

// Kept column indices, canonical order. Variance first, then for each
// correlated pair the later canonical column is dropped. Statistics computed
// over the given rows only (pass training rows to avoid leakage).
inline std::vector<std::size_t> filter_columns(const FeatureMatrix& M,
                                               const FeatureSelectConfig& cfg,
                                               const std::vector<std::size_t>& rows,
                                               FilterLog* log = nullptr) {
    cfg.validate();
    if (rows.empty()) throw EmptyInput("filter_columns with no rows");
    const std::size_t n = rows.size();
    const std::size_t f = M.cols();

    std::vector<double> mean(f, 0.0), var(f, 0.0);
    for (std::size_t c = 0; c < f; ++c) {
        double s = 0.0;
        for (std::size_t r : rows) s += M.at(r, c);
        mean[c] = s / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t r : rows) {
            const double d = M.at(r, c) - mean[c];
            ss += d * d;
        }
        var[c] = ss / static_cast<double>(n);
    }

    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < f; ++c) {
        if (var[c] < cfg.var_threshold) {
            if (log) log->dropped_low_variance.push_back(M.columns[c]);
        } else {
            kept.push_back(c);
        }
    }
    if (kept.empty()) throw AllFeaturesDropped("variance filter removed all");

    // Greedy correlation pass over the kept set in canonical order.
    std::vector<bool> dead(kept.size(), false);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (dead[i]) continue;
        for (std::size_t j = i + 1; j < kept.size(); ++j) {
            if (dead[j]) continue;
            const std::size_t a = kept[i], b = kept[j];
            double sab = 0.0;
            for (std::size_t r : rows)
                sab += (M.at(r, a) - mean[a]) * (M.at(r, b) - mean[b]);
            sab /= static_cast<double>(n);
            const double r2 = sab / std::sqrt(var[a] * var[b]);
            if (std::abs(r2) > cfg.corr_threshold) {
                dead[j] = true;
                if (log)
                    log->dropped_correlated.emplace_back(M.columns[b],
                                                         M.columns[a]);
            }
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < kept.size(); ++i)
        if (!dead[i]) out.push_back(kept[i]);
    if (out.empty()) throw AllFeaturesDropped("correlation filter removed all");
    return out;
}

// ---------------------------------------------------------------------------
// Standardization + forest wrapper. Scaler statistics come from training
// rows only; tests are transformed with those statistics.
// ---------------------------------------------------------------------------

struct TrainedModel {
    std::vector<std::size_t> features;  // column indices into source matrix
    std::vector<double> mu, sigma;      // per selected feature (training rows)
    RandomForest forest;
    int n_classes = kNumConditions;

    std::vector<double> standardized(const FeatureMatrix& M,
                                     const std::vector<std::size_t>& rows) const {
        std::vector<double> out(rows.size() * features.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < features.size(); ++j)
                out[i * features.size() + j] =
                    (M.at(rows[i], features[j]) - mu[j]) / sigma[j];
        return out;
    }

    std::vector<int> predict(const FeatureMatrix& M,
                             const std::vector<std::size_t>& rows) const {
        const std::vector<double> X = standardized(M, rows);
        const DataView view{X.data(), rows.size(), features.size()};
        return forest.predict(view);
    }
};

inline TrainedModel train_forest(const FeatureMatrix& M,
                                 const std::vector<std::size_t>& train_rows,
                                 const std::vector<std::size_t>& features,
                                 const ForestConfig& cfg,
                                 int n_classes = kNumConditions) {
    if (features.empty()) throw InvalidParams("no features to train on");
    if (train_rows.empty()) throw EmptyInput("no training rows");
    TrainedModel model;
    model.features = features;
    model.n_classes = n_classes;
    model.mu.assign(features.size(), 0.0);
    model.sigma.assign(features.size(), 1.0);
    for (std::size_t j = 0; j < features.size(); ++j) {
        double s = 0.0;
        for (std::size_t r : train_rows) s += M.at(r, features[j]);
        model.mu[j] = s / static_cast<double>(train_rows.size());
        double ss = 0.0;
        for (std::size_t r : train_rows) {
            const double d = M.at(r, features[j]) - model.mu[j];
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(train_rows.size()));
        model.sigma[j] = sd > 1e-15 ? sd : 1.0;
    }
    const std::vector<double> X = model.standardized(M, train_rows);
    const DataView view{X.data(), train_rows.size(), features.size()};
    model.forest.fit(view, M.labels(train_rows), n_classes, cfg);
    return model;
}

// ---------------------------------------------------------------------------
// Splits.
// ---------------------------------------------------------------------------

// Stratified train/test split preserving class proportions. Both sides must
// retain every class present in the input.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split(const std::vector<int>& labels, int n_classes,
                 double test_frac, std::uint64_t seed) {
    if (test_frac <= 0.0 || test_frac >= 1.0)
        throw InvalidParams("test_frac must be in (0,1)");
    std::vector<std::size_t> train, test;
    Rng base(seed);
    for (int c = 0; c < n_classes; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) idx.push_back(i);
        if (idx.empty()) continue;
        Rng rng = base.fork(static_cast<std::uint64_t>(c));
        rng.shuffle(idx);
        const auto n_test = static_cast<std::size_t>(std::round(
            test_frac * static_cast<double>(idx.size())));
        if (n_test == 0 || n_test >= idx.size())
            throw ClassMissingInSplit("class " + std::to_string(c) +
                                      " cannot appear on both sides");
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_test ? test : train).push_back(idx[i]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

// Stratified k-fold assignment: per class, shuffled then dealt round-robin.
inline std::vector<int> stratified_folds(const std::vector<int>& labels,
                                         int n_classes, int k,
                                         std::uint64_t seed) {
    if (k < 2) throw InvalidParams("need k >= 2 folds");
    std::vector<int> fold(labels.size(), -1);
    Rng base(seed);
    for (int c = 0; c < n_classes; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) idx.push_back(i);
        Rng rng = base.fork(static_cast<std::uint64_t>(c) + 1000);
        rng.shuffle(idx);
        for (std::size_t i = 0; i < idx.size(); ++i)
            fold[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return fold;
}

// ---------------------------------------------------------------------------
// Cross-validated score and permutation importance. Importance is the mean
// balanced-accuracy drop when one standardized feature column is shuffled
// within the held-out fold, over perm_repeats shuffles x cv_folds folds.
// ---------------------------------------------------------------------------

struct CvResult {
    double balanced_accuracy = 0.0;     // mean of per-fold scores
    std::vector<double> importance;     // per feature, empty if not requested
};

inline CvResult cross_validate(const FeatureMatrix& M,
                               const std::vector<std::size_t>& rows,
                               const std::vector<std::size_t>& feats,
                               const FeatureSelectConfig& cfg,
                               const ForestConfig& forest_cfg,
                               std::uint64_t seed, bool with_importance) {
    cfg.validate();
    const std::vector<int> labels = M.labels(rows);
    const std::vector<int> fold =
        stratified_folds(labels, kNumConditions, cfg.cv_folds, seed);

    const std::size_t nf = feats.size();
    std::vector<double> fold_ba(cfg.cv_folds, kMissing);
    std::vector<std::vector<double>> fold_imp(
        cfg.cv_folds, std::vector<double>(with_importance ? nf : 0, 0.0));

    parallel_for(static_cast<std::size_t>(cfg.cv_folds), [&](std::size_t f) {
        std::vector<std::size_t> tr, te;
        std::vector<int> te_labels;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (fold[i] == static_cast<int>(f)) {
                te.push_back(rows[i]);
                te_labels.push_back(labels[i]);
            } else {
                tr.push_back(rows[i]);
            }
        }
        if (te.empty() || tr.empty()) return;
        ForestConfig fc = forest_cfg;
        fc.seed = forest_cfg.seed ^ (0x51ed2701u + f);
        const TrainedModel model = train_forest(M, tr, feats, fc);
        std::vector<double> X = model.standardized(M, te);
        const DataView view{X.data(), te.size(), nf};
        const double base_ba =
            eval_metrics(model.forest.predict(view), te_labels, kNumConditions)
                .balanced_accuracy;
        fold_ba[f] = base_ba;
        if (!with_importance) return;

        Rng fold_rng = Rng(seed).fork(7000 + f);
        std::vector<double> saved(te.size());
        for (std::size_t j = 0; j < nf; ++j) {
            for (std::size_t i = 0; i < te.size(); ++i)
                saved[i] = X[i * nf + j];
            double drop_sum = 0.0;
            for (int rep = 0; rep < cfg.perm_repeats; ++rep) {
                Rng rng = fold_rng.fork(j * 131 + static_cast<std::size_t>(rep));
                std::vector<double> col(saved);
                rng.shuffle(col);
                for (std::size_t i = 0; i < te.size(); ++i)
                    X[i * nf + j] = col[i];
                const double ba =
                    eval_metrics(model.forest.predict(view), te_labels,
                                 kNumConditions)
                        .balanced_accuracy;
                drop_sum += base_ba - ba;
            }
            for (std::size_t i = 0; i < te.size(); ++i)
                X[i * nf + j] = saved[i];
            fold_imp[f][j] = drop_sum / static_cast<double>(cfg.perm_repeats);
        }
    });

    CvResult res;
    double sum = 0.0;
    int n = 0;
    for (double v : fold_ba)
        if (!is_missing(v)) {
            sum += v;
            ++n;
        }
    if (n == 0) throw EmptyInput("no usable folds");
    res.balanced_accuracy = sum / n;
    if (with_importance) {
        res.importance.assign(nf, 0.0);
        for (int f = 0; f < cfg.cv_folds; ++f) {
            if (is_missing(fold_ba[f])) continue;
            for (std::size_t j = 0; j < nf; ++j)
                res.importance[j] += fold_imp[f][j] / n;
        }
    }
    return res;
}

// Convenience wrapper matching the one-model signature: importance of each
// feature for a fitted model evaluated via fresh CV on the given rows.
inline std::vector<double> permutation_importance(
    const FeatureMatrix& M, const std::vector<std::size_t>& rows,
    const std::vector<std::size_t>& feats, const FeatureSelectConfig& cfg,
    const ForestConfig& forest_cfg, std::uint64_t seed) {
    return cross_validate(M, rows, feats, cfg, forest_cfg, seed, true)
        .importance;
}

// ---------------------------------------------------------------------------
// Backward elimination: drop the least-important elim_fraction per step;
// stop when CV accuracy falls below best-so-far minus stop_tolerance or when
// another step would leave fewer than min_features.
// ---------------------------------------------------------------------------

struct EliminationStep {
    std::size_t n_features = 0;
    double cv_balanced_accuracy = 0.0;
};

inline std::vector<std::size_t> backward_eliminate(
    const FeatureMatrix& M, const std::vector<std::size_t>& rows,
    std::vector<std::size_t> current, const FeatureSelectConfig& cfg,
    const ForestConfig& forest_cfg, std::uint64_t seed,
    std::vector<EliminationStep>* trace = nullptr) {
    cfg.validate();
    if (current.empty()) throw InvalidParams("backward_eliminate on no features");

    CvResult res = cross_validate(M, rows, current, cfg, forest_cfg, seed, true);
    double best_score = res.balanced_accuracy;
    std::vector<std::size_t> best_set = current;
    if (trace) trace->push_back({current.size(), res.balanced_accuracy});

    while (true) {
        const auto n_drop = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(
                   cfg.elim_fraction * static_cast<double>(current.size()))));
        if (current.size() < n_drop +
                                 static_cast<std::size_t>(cfg.min_features))
            break;

        // Rank ascending by importance; ties drop the later canonical column.
        std::vector<std::size_t> order(current.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (res.importance[a] != res.importance[b])
                return res.importance[a] < res.importance[b];
            return current[a] > current[b];
        });
        std::vector<bool> drop(current.size(), false);
        for (std::size_t i = 0; i < n_drop; ++i) drop[order[i]] = true;
        std::vector<std::size_t> next;
        for (std::size_t i = 0; i < current.size(); ++i)
            if (!drop[i]) next.push_back(current[i]);
        current = std::move(next);

        res = cross_validate(M, rows, current, cfg, forest_cfg, seed, true);
        if (trace) trace->push_back({current.size(), res.balanced_accuracy});
        if (res.balanced_accuracy > best_score) {
            best_score = res.balanced_accuracy;
            best_set = current;
        } else if (res.balanced_accuracy < best_score - cfg.stop_tolerance) {
            break;
        }
    }
    return best_set;
}

// ---------------------------------------------------------------------------
// Random-split evaluation: stratified 80/20 per seed; feature selection is
// computed once on the first seed's training split and reused.
// ---------------------------------------------------------------------------

struct SplitEvalResult {
    std::vector<std::uint64_t> seeds;
    std::vector<EvalReport> per_seed;
    MeanSd balanced_accuracy;
    MeanSd weighted_f1;
    MeanSd kappa;
    std::vector<std::size_t> selected_features;
    FilterLog filter_log;
};

inline std::vector<std::uint64_t> default_seeds(std::size_t n) {
    std::vector<std::uint64_t> seeds(n);
    for (std::size_t i = 0; i < n; ++i) seeds[i] = i + 1;
    return seeds;
}

inline SplitEvalResult random_split_eval(
    const FeatureMatrix& M, const FeatureSelectConfig& sel_cfg,
    const ForestConfig& forest_cfg,
    const std::vector<std::uint64_t>& seeds = default_seeds(15),
    bool do_selection = true, double test_frac = 0.2) {
    if (seeds.empty()) throw InvalidParams("need at least one seed");
    SplitEvalResult out;
    out.seeds = seeds;

    const std::vector<std::size_t> all = M.all_rows();
    const std::vector<int> labels = M.labels(all);

    if (do_selection) {
        const auto split1 =
            stratified_split(labels, kNumConditions, test_frac, seeds[0]);
        const std::vector<std::size_t> filtered =
            filter_columns(M, sel_cfg, split1.first, &out.filter_log);
        out.selected_features = backward_eliminate(
            M, split1.first, filtered, sel_cfg, forest_cfg, seeds[0]);
    } else {
        for (std::size_t c = 0; c < M.cols(); ++c)
            out.selected_features.push_back(c);
    }

    out.per_seed.resize(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
        const auto [tr, te] =
            stratified_split(labels, kNumConditions, test_frac, seeds[i]);
        ForestConfig fc = forest_cfg;
        fc.seed = seeds[i];
        const TrainedModel model =
            train_forest(M, tr, out.selected_features, fc);
        out.per_seed[i] =
            eval_metrics(model.predict(M, te), M.labels(te), kNumConditions);
    });

    std::vector<double> ba, f1, kp;
    for (const auto& r : out.per_seed) {
        ba.push_back(r.balanced_accuracy);
        f1.push_back(r.weighted_f1);
        kp.push_back(r.kappa);
    }
    out.balanced_accuracy = mean_sd(ba);
    out.weighted_f1 = mean_sd(f1);
    out.kappa = mean_sd(kp);
    return out;
}

// ---------------------------------------------------------------------------
// Leave-one-participant-out: per participant, train on everyone else with
// all features (no selection), repeating over forest seeds only.
// ---------------------------------------------------------------------------

struct LopoResult {
    std::vector<std::string> participants;
    std::vector<MeanSd> per_participant;   // balanced accuracy over seeds
    std::vector<EvalReport> first_seed_report;
    MeanSd aggregate;                      // across participant means
};

inline LopoResult lopo_eval(const FeatureMatrix& M,
                            const ForestConfig& forest_cfg,
                            int seeds_per_participant = 15) {
    if (seeds_per_participant < 1) throw InvalidParams("need >= 1 seed");
    LopoResult out;
    out.participants = M.participants();
    if (out.participants.size() < 2)
        throw SingleParticipant("LOPO needs at least two participants");

    std::vector<std::size_t> feats;
    for (std::size_t c = 0; c < M.cols(); ++c) feats.push_back(c);

    const std::size_t np = out.participants.size();
    out.per_participant.resize(np);
    out.first_seed_report.resize(np);
    parallel_for(np, [&](std::size_t p) {
        std::vector<std::size_t> tr, te;
        for (std::size_t r = 0; r < M.rows(); ++r)
            (M.meta[r].participant == out.participants[p] ? te : tr).push_back(r);
        const std::vector<int> te_labels = M.labels(te);
        std::vector<double> bas;
        for (int s = 1; s <= seeds_per_participant; ++s) {
            ForestConfig fc = forest_cfg;
            fc.seed = static_cast<std::uint64_t>(s);
            const TrainedModel model = train_forest(M, tr, feats, fc);
            const EvalReport rep =
                eval_metrics(model.predict(M, te), te_labels, kNumConditions);
            if (s == 1) out.first_seed_report[p] = rep;
            bas.push_back(rep.balanced_accuracy);
        }
        out.per_participant[p] = mean_sd(bas);
    });

    std::vector<double> means;
    for (const auto& m : out.per_participant) means.push_back(m.mean);
    out.aggregate = mean_sd(means);
    return out;
}

// ---------------------------------------------------------------------------
// Participant-specific learning curves. Training takes the first N windows
// per condition in window order (experimental session), skips the next
// window as an overlap buffer, and tests on the remainder. Size 0 trains on
// the baseline-session windows alone. Feature selection runs once per
// participant at the largest feasible size and is reused.
// ---------------------------------------------------------------------------

struct LearningCurveConfig {
    std::vector<int> train_sizes = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    int buffer = 1;
    int seeds_per_point = 10;
    bool include_baseline = false;
    int baseline_windows_per_condition = 3;

    void validate() const {
        if (train_sizes.empty()) throw InvalidParams("empty train_sizes");
        if (buffer < 1) throw InvalidParams("buffer must be >= 1");
        if (seeds_per_point < 1) throw InvalidParams("need >= 1 seed");
    }
};

struct LearningCurvePoint {
    int size = 0;
    MeanSd population;           // across participants with data at this size
    std::size_t n_participants = 0;
};

struct LearningCurveResult {
    std::vector<int> sizes;
    std::vector<std::string> participants;
    std::vector<std::vector<double>> accuracy;  // [participant][size], kMissing when excluded
    std::vector<LearningCurvePoint> population;
    std::vector<std::string> exclusions;
};

inline LearningCurveResult learning_curve(const FeatureMatrix& M,
                                          const LearningCurveConfig& lc,
                                          const FeatureSelectConfig& sel_cfg,
                                          const ForestConfig& forest_cfg,
                                          bool do_selection = true) {
    lc.validate();
    LearningCurveResult out;
    out.sizes = lc.train_sizes;
    out.participants = M.participants();
    const std::size_t np = out.participants.size();
    out.accuracy.assign(np, std::vector<double>(lc.train_sizes.size(), kMissing));

    std::vector<std::vector<std::string>> excl(np);
    parallel_for(np, [&](std::size_t p) {
        const std::string& pid = out.participants[p];
        // Experimental windows per condition in window order; baseline pool.
        std::array<std::vector<std::size_t>, kNumConditions> cond_rows;
        std::vector<std::size_t> baseline_rows;
        for (std::size_t r = 0; r < M.rows(); ++r) {
            if (M.meta[r].participant != pid) continue;
            if (M.meta[r].session == "baseline")
                baseline_rows.push_back(r);
            else
                cond_rows[M.meta[r].condition].push_back(r);
        }
        for (auto& v : cond_rows)
            std::sort(v.begin(), v.end(), [&](std::size_t a, std::size_t b) {
                return M.meta[a].window_index < M.meta[b].window_index;
            });

        auto feasible = [&](int size) {
            for (const auto& v : cond_rows)
                if (v.size() < static_cast<std::size_t>(size + lc.buffer + 1))
                    return false;
            return true;
        };
        auto training_rows = [&](int size) {
            std::vector<std::size_t> tr;
            if (lc.include_baseline || size == 0)
                tr.insert(tr.end(), baseline_rows.begin(), baseline_rows.end());
            for (const auto& v : cond_rows)
                for (int i = 0; i < size; ++i)
                    tr.push_back(v[static_cast<std::size_t>(i)]);
            return tr;
        };
        auto test_rows = [&](int size) {
            std::vector<std::size_t> te;
            const int skip = size == 0 ? 0 : size + lc.buffer;
            for (const auto& v : cond_rows)
                for (std::size_t i = static_cast<std::size_t>(skip);
                     i < v.size(); ++i)
                    te.push_back(v[i]);
            return te;
        };

        // Selection at the largest feasible size.
        int sel_size = -1;
        for (int s : lc.train_sizes)
            if (s > sel_size && feasible(s)) sel_size = s;
        if (sel_size < 0) {
            excl[p].push_back(pid + ": no feasible training size");
            return;
        }
        std::vector<std::size_t> feats;
        if (do_selection) {
            const std::vector<std::size_t> tr = training_rows(sel_size);
            FilterLog log;
            const auto filtered = filter_columns(M, sel_cfg, tr, &log);
            feats = backward_eliminate(M, tr, filtered, sel_cfg, forest_cfg,
                                       forest_cfg.seed + 1);
        } else {
            for (std::size_t c = 0; c < M.cols(); ++c) feats.push_back(c);
        }

        for (std::size_t si = 0; si < lc.train_sizes.size(); ++si) {
            const int size = lc.train_sizes[si];
            if (size == 0) {
                if (baseline_rows.empty()) {
                    excl[p].push_back(pid + ": size 0 without baseline rows");
                    continue;
                }
            } else if (!feasible(size)) {
                excl[p].push_back(pid + ": insufficient windows at size " +
                                  std::to_string(size));
                continue;
            }
            const std::vector<std::size_t> tr = training_rows(size);
            const std::vector<std::size_t> te = test_rows(size);
            if (tr.empty() || te.empty()) {
                excl[p].push_back(pid + ": empty split at size " +
                                  std::to_string(size));
                continue;
            }
            double sum = 0.0;
            for (int s = 1; s <= lc.seeds_per_point; ++s) {
                ForestConfig fc = forest_cfg;
                fc.seed = static_cast<std::uint64_t>(s) * 7919u +
                          static_cast<std::uint64_t>(size);
                const TrainedModel model = train_forest(M, tr, feats, fc);
                sum += eval_metrics(model.predict(M, te), M.labels(te),
                                    kNumConditions)
                           .balanced_accuracy;
            }
            out.accuracy[p][si] =
                sum / static_cast<double>(lc.seeds_per_point);
        }
    });
    for (auto& e : excl)
        out.exclusions.insert(out.exclusions.end(), e.begin(), e.end());

    for (std::size_t si = 0; si < lc.train_sizes.size(); ++si) {
        std::vector<double> vals;
        for (std::size_t p = 0; p < np; ++p)
            if (!is_missing(out.accuracy[p][si]))
                vals.push_back(out.accuracy[p][si]);
        LearningCurvePoint pt;
        pt.size = lc.train_sizes[si];
        pt.n_participants = vals.size();
        if (!vals.empty()) pt.population = mean_sd(vals);
        out.population.push_back(pt);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spearman rank correlation (average ranks for ties).
// ---------------------------------------------------------------------------

inline double spearman_rho(const std::vector<double>& x,
                           const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw InvalidParams("spearman_rho needs two equal-length sequences");
    auto ranks = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) /
                                   2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> rx = ranks(x), ry = ranks(y);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(rx.size());
    my /= static_cast<double>(ry.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace facedyn
