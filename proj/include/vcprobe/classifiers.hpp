#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vcprobe/dataset.hpp"

namespace vcprobe {

class TrainedModel {
public:
    virtual ~TrainedModel() = default;

    virtual std::size_t dimension() const noexcept = 0;
    virtual std::uint8_t predict(std::span<const double> features) const = 0;

    // Labels for every row of `data`. Batch-capable models override this.
    virtual std::vector<std::uint8_t> predict_all(const Dataset& data) const;

    // Flat parameter vector; equal parameters imply equal predictions.
    virtual std::vector<double> parameters() const = 0;
};

struct FamilyDescriptor {
    std::string name;
    std::vector<std::pair<std::string, double>> hyperparameters;
};

class ClassifierFamily {
public:
    virtual ~ClassifierFamily() = default;

    // Deterministic given (data, seed). Callers go through fit_erm, which
    // validates the data first.
    virtual std::unique_ptr<TrainedModel> fit(const Dataset& data, std::uint64_t seed) const = 0;

    virtual FamilyDescriptor descriptor() const = 0;
    virtual bool supports_dimension(std::size_t p) const { return p >= 1; }
    virtual std::optional<double> known_vc_dimension(std::size_t p) const = 0;
};

// Memorizes its training set; predicts the majority label of an exact feature
// match (0 on ties and on unseen points).
class ShatterOracle final : public ClassifierFamily {
public:
    std::unique_ptr<TrainedModel> fit(const Dataset& data, std::uint64_t seed) const override;
    FamilyDescriptor descriptor() const override { return {"shatter", {}}; }
    std::optional<double> known_vc_dimension(std::size_t) const override { return std::nullopt; }
};

// Indicator of a closed interval [a, b] on the line, solved exactly. With
// `complement` the family also contains the complements of intervals.
class Interval1D final : public ClassifierFamily {
public:
    explicit Interval1D(bool complement = false) : complement_(complement) {}

    std::unique_ptr<TrainedModel> fit(const Dataset& data, std::uint64_t seed) const override;
    FamilyDescriptor descriptor() const override;
    bool supports_dimension(std::size_t p) const override { return p == 1; }
    std::optional<double> known_vc_dimension(std::size_t) const override {
        return complement_ ? 3.0 : 2.0;
    }

private:
    bool complement_;
};

struct PocketBudget {
    int restarts = 32;
    int epochs = 200;
};

// Affine halfspaces sign(w . x + b) trained by the pocket perceptron.
class LinearHalfspace final : public ClassifierFamily {
public:
    explicit LinearHalfspace(PocketBudget budget = {});

    std::unique_ptr<TrainedModel> fit(const Dataset& data, std::uint64_t seed) const override;
    FamilyDescriptor descriptor() const override;
    std::optional<double> known_vc_dimension(std::size_t p) const override {
        return static_cast<double>(p + 1);
    }
    const PocketBudget& budget() const noexcept { return budget_; }

private:
    PocketBudget budget_;
};

// Always predicts the same label.
class ConstantClassifier final : public ClassifierFamily {
public:
    explicit ConstantClassifier(std::uint8_t label) : label_(label) {}

    std::unique_ptr<TrainedModel> fit(const Dataset& data, std::uint64_t seed) const override;
    FamilyDescriptor descriptor() const override;
    std::optional<double> known_vc_dimension(std::size_t) const override { return std::nullopt; }

private:
    std::uint8_t label_;
};

// Fraction of rows whose label differs from the model's prediction.
double empirical_risk(const TrainedModel& model, const Dataset& data);
double empirical_risk(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> labels);

// Validates `data` against the family and trains.
std::unique_ptr<TrainedModel> fit_erm(const ClassifierFamily& family, const Dataset& data,
                                      std::uint64_t seed);

}  // namespace vcprobe
