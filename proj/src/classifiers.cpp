#include "vcprobe/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "vcprobe/error.hpp"
#include "vcprobe/rng.hpp"

namespace vcprobe {

std::vector<std::uint8_t> TrainedModel::predict_all(const Dataset& data) const {
    std::vector<std::uint8_t> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = predict(data.features(i));
    return out;
}

double empirical_risk(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> labels) {
    if (labels.empty()) throw DomainError("empirical risk of an empty dataset is undefined");
    if (predicted.size() != labels.size())
        throw DomainError("prediction count does not match dataset size");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) wrong += predicted[i] != labels[i];
    return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

double empirical_risk(const TrainedModel& model, const Dataset& data) {
    if (data.empty()) throw DomainError("empirical risk of an empty dataset is undefined");
    if (model.dimension() != data.dimension())
        throw DomainError("model dimension " + std::to_string(model.dimension()) +
                          " does not match data dimension " + std::to_string(data.dimension()));
    return empirical_risk(model.predict_all(data), data.labels());
}

std::unique_ptr<TrainedModel> fit_erm(const ClassifierFamily& family, const Dataset& data,
                                      std::uint64_t seed) {
    if (data.empty()) throw DomainError("cannot fit on an empty dataset");
    if (!family.supports_dimension(data.dimension()))
        throw DomainError("family '" + family.descriptor().name + "' does not support dimension " +
                          std::to_string(data.dimension()));
    return family.fit(data, seed);
}

// ---------------------------------------------------------------------------
// ShatterOracle

namespace {

class MemorizingModel final : public TrainedModel {
public:
    MemorizingModel(std::size_t dimension, std::vector<double> keys, std::vector<std::uint8_t> labels)
        : dimension_(dimension), keys_(std::move(keys)), labels_(std::move(labels)) {}

    std::size_t dimension() const noexcept override { return dimension_; }

    std::uint8_t predict(std::span<const double> x) const override {
        std::size_t lo = 0;
        std::size_t hi = labels_.size();
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            const auto key = row(mid);
            if (std::lexicographical_compare(key.begin(), key.end(), x.begin(), x.end()))
                lo = mid + 1;
            else
                hi = mid;
        }
        if (lo < labels_.size() && std::ranges::equal(row(lo), x)) return labels_[lo];
        return 0;
    }

    std::vector<double> parameters() const override {
        std::vector<double> out = keys_;
        out.insert(out.end(), labels_.begin(), labels_.end());
        return out;
    }

private:
    std::span<const double> row(std::size_t i) const { return {keys_.data() + i * dimension_, dimension_}; }

    std::size_t dimension_;
    std::vector<double> keys_;
    std::vector<std::uint8_t> labels_;
};

std::vector<std::size_t> lexicographic_order(const Dataset& data) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
        const auto fa = data.features(a);
        const auto fb = data.features(b);
        return std::lexicographical_compare(fa.begin(), fa.end(), fb.begin(), fb.end());
    });
    return order;
}

}  // namespace

std::unique_ptr<TrainedModel> ShatterOracle::fit(const Dataset& data, std::uint64_t) const {
    const auto order = lexicographic_order(data);
    std::vector<double> keys;
    std::vector<std::uint8_t> labels;
    std::size_t i = 0;
    while (i < order.size()) {
        const auto key = data.features(order[i]);
        std::size_t ones = 0;
        std::size_t j = i;
        while (j < order.size() && std::ranges::equal(data.features(order[j]), key)) {
            ones += data.label(order[j]);
            ++j;
        }
        const std::size_t count = j - i;
        keys.insert(keys.end(), key.begin(), key.end());
        labels.push_back(2 * ones > count ? 1 : 0);
        i = j;
    }
    return std::make_unique<MemorizingModel>(data.dimension(), std::move(keys), std::move(labels));
}

// ---------------------------------------------------------------------------
// Interval1D

namespace {

class IntervalModel final : public TrainedModel {
public:
    IntervalModel(double left, double right, bool inside_is_one)
        : left_(left), right_(right), inside_is_one_(inside_is_one) {}

    std::size_t dimension() const noexcept override { return 1; }

    std::uint8_t predict(std::span<const double> x) const override {
        const bool inside = left_ <= x[0] && x[0] <= right_;
        return inside == inside_is_one_ ? 1 : 0;
    }

    std::vector<double> parameters() const override {
        return {left_, right_, inside_is_one_ ? 1.0 : 0.0};
    }

private:
    double left_;
    double right_;
    bool inside_is_one_;
};

struct IntervalCandidate {
    long errors = 0;
    bool empty = true;
    double left = 0.0;
    double width = 0.0;
    bool inside_is_one = true;
    double right = 0.0;

    // Fewest errors, then nonempty, then smallest left endpoint, then smallest
    // width, then the plain (inside = 1) polarity.
    bool better_than(const IntervalCandidate& o) const {
        if (errors != o.errors) return errors < o.errors;
        if (empty != o.empty) return !empty;
        if (left != o.left) return left < o.left;
        if (width != o.width) return width < o.width;
        return inside_is_one && !o.inside_is_one;
    }
};

// Best block of consecutive distinct values maximizing the summed gain.
// errors(block) = baseline - gain(block); the empty block has gain 0.
IntervalCandidate best_block(std::span<const double> values, std::span<const long> gains,
                             long baseline, bool inside_is_one) {
    IntervalCandidate best{baseline, true, 0.0, 0.0, inside_is_one, 0.0};
    long prefix = 0;
    long min_prefix = 0;
    std::size_t min_index = 0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        prefix += gains[j];
        IntervalCandidate cand{baseline - (prefix - min_prefix), false, values[min_index],
                               values[j] - values[min_index], inside_is_one, values[j]};
        if (cand.better_than(best)) best = cand;
        if (prefix < min_prefix) {
            min_prefix = prefix;
            min_index = j + 1;
        }
    }
    return best;
}

}  // namespace

FamilyDescriptor Interval1D::descriptor() const {
    return {"interval1d", {{"complement", complement_ ? 1.0 : 0.0}}};
}

std::unique_ptr<TrainedModel> Interval1D::fit(const Dataset& data, std::uint64_t) const {
    if (data.dimension() != 1) throw DomainError("interval1d requires one feature");
    const auto order = lexicographic_order(data);

    std::vector<double> values;
    std::vector<long> gains;  // (#label 1) - (#label 0) per distinct value
    long ones = 0;
    long zeros = 0;
    for (std::size_t idx : order) {
        const double x = data.features(idx)[0];
        const long g = data.label(idx) ? 1 : -1;
        (data.label(idx) ? ones : zeros) += 1;
        if (values.empty() || values.back() != x) {
            values.push_back(x);
            gains.push_back(g);
        } else {
            gains.back() += g;
        }
    }

    IntervalCandidate best = best_block(values, gains, ones, true);
    if (complement_) {
        std::vector<long> negated(gains.size());
        std::ranges::transform(gains, negated.begin(), [](long g) { return -g; });
        const auto comp = best_block(values, negated, zeros, false);
        if (comp.better_than(best)) best = comp;
    }

    if (best.empty) {
        constexpr double inf = std::numeric_limits<double>::infinity();
        return std::make_unique<IntervalModel>(inf, -inf, best.inside_is_one);
    }
    return std::make_unique<IntervalModel>(best.left, best.right, best.inside_is_one);
}

// ---------------------------------------------------------------------------
// LinearHalfspace

namespace {

class HalfspaceModel final : public TrainedModel {
public:
    explicit HalfspaceModel(std::vector<double> weights) : weights_(std::move(weights)) {}

    std::size_t dimension() const noexcept override { return weights_.size() - 1; }

    std::uint8_t predict(std::span<const double> x) const override {
        double s = weights_.back();
        for (std::size_t j = 0; j < x.size(); ++j) s += weights_[j] * x[j];
        return s > 0.0 ? 1 : 0;
    }

    std::vector<double> parameters() const override { return weights_; }

private:
    std::vector<double> weights_;  // p coefficients followed by the intercept
};

double margin(std::span<const double> w, std::span<const double> x) {
    double s = w.back();
    for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
    return s;
}

std::size_t count_errors(std::span<const double> w, const Dataset& data) {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const bool positive = margin(w, data.features(i)) > 0.0;
        wrong += positive != (data.label(i) == 1);
    }
    return wrong;
}

}  // namespace

LinearHalfspace::LinearHalfspace(PocketBudget budget) : budget_(budget) {
    if (budget.restarts < 1 || budget.epochs < 1)
        throw ConfigError("pocket perceptron budget needs restarts >= 1 and epochs >= 1");
}

FamilyDescriptor LinearHalfspace::descriptor() const {
    return {"linear",
            {{"restarts", static_cast<double>(budget_.restarts)},
             {"epochs", static_cast<double>(budget_.epochs)}}};
}

std::unique_ptr<TrainedModel> LinearHalfspace::fit(const Dataset& data, std::uint64_t seed) const {
    const std::size_t p = data.dimension();
    const std::size_t n = data.size();

    // Pocket starts at the better constant classifier.
    std::vector<double> best(p + 1, 0.0);
    std::size_t best_errors = count_errors(best, data);
    std::vector<double> all_ones(p + 1, 0.0);
    all_ones[p] = 1.0;
    if (const std::size_t e = count_errors(all_ones, data); e < best_errors) {
        best_errors = e;
        best = all_ones;
    }
    std::vector<double> w(p + 1);
    std::vector<std::size_t> order(n);

    for (int r = 0; r < budget_.restarts && best_errors > 0; ++r) {
        Engine eng(substream(seed, static_cast<std::uint64_t>(r)));
        if (r == 0) {
            std::ranges::fill(w, 0.0);
        } else {
            for (double& wj : w) wj = 2.0 * uniform01(eng) - 1.0;
        }
        std::iota(order.begin(), order.end(), std::size_t{0});

        for (int epoch = 0; epoch < budget_.epochs; ++epoch) {
            for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(eng, i)]);
            bool updated = false;
            for (std::size_t idx : order) {
                const auto x = data.features(idx);
                const double sign = data.label(idx) ? 1.0 : -1.0;
                if (sign * margin(w, x) <= 0.0) {
                    for (std::size_t j = 0; j < p; ++j) w[j] += sign * x[j];
                    w[p] += sign;
                    updated = true;
                }
            }
            const std::size_t errors = count_errors(w, data);
            if (errors < best_errors) {
                best_errors = errors;
                best = w;
            }
            if (!updated || best_errors == 0) break;
        }
    }
    return std::make_unique<HalfspaceModel>(std::move(best));
}

// ---------------------------------------------------------------------------
// ConstantClassifier

namespace {

class ConstantModel final : public TrainedModel {
public:
    ConstantModel(std::size_t dimension, std::uint8_t label) : dimension_(dimension), label_(label) {}
    std::size_t dimension() const noexcept override { return dimension_; }
    std::uint8_t predict(std::span<const double>) const override { return label_; }
    std::vector<double> parameters() const override { return {static_cast<double>(label_)}; }

private:
    std::size_t dimension_;
    std::uint8_t label_;
};

}  // namespace

FamilyDescriptor ConstantClassifier::descriptor() const {
    return {label_ ? "constant1" : "constant0", {}};
}

std::unique_ptr<TrainedModel> ConstantClassifier::fit(const Dataset& data, std::uint64_t) const {
    return std::make_unique<ConstantModel>(data.dimension(), label_);
}

}  // namespace vcprobe
