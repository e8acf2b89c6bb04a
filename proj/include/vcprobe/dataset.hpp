#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vcprobe {

struct LabeledSample {
    std::vector<double> features;
    std::uint8_t label = 0;
};

// Row-major feature matrix with binary labels. Row order is significant.
class Dataset {
public:
    explicit Dataset(std::size_t dimension = 1);

    static Dataset from_samples(std::size_t dimension, std::span<const LabeledSample> samples);

    void reserve(std::size_t rows);
    void add(std::span<const double> features, std::uint8_t label);
    void add(const LabeledSample& sample) { add(sample.features, sample.label); }

    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    std::size_t dimension() const noexcept { return dimension_; }

    std::span<const double> features(std::size_t row) const noexcept {
        return {features_.data() + row * dimension_, dimension_};
    }
    std::uint8_t label(std::size_t row) const noexcept { return labels_[row]; }
    void set_label(std::size_t row, std::uint8_t label);

    std::span<const std::uint8_t> labels() const noexcept { return labels_; }
    std::span<const double> feature_data() const noexcept { return features_; }

    // Rows [begin, end) as a new dataset.
    Dataset slice(std::size_t begin, std::size_t end) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::size_t dimension_;
    std::vector<double> features_;
    std::vector<std::uint8_t> labels_;
};

}  // namespace vcprobe
