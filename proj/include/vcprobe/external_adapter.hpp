#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "vcprobe/classifiers.hpp"

namespace vcprobe {

// Child-process classifier. The child reads from stdin
//
//   TRAIN n p seed
//   x1,...,xp,y        (n rows)
//   PREDICT q
//   x1,...,xp          (q rows)
//
// and must answer on stdout with q lines, each "0" or "1", followed by "OK".
// Anything else, a nonzero exit status, or exceeding the timeout raises
// AdapterError with the child's stderr attached.
struct AdapterCommand {
    std::vector<std::string> argv;
    std::chrono::milliseconds timeout{60'000};
};

std::vector<std::uint8_t> external_adapter_fit_predict(const AdapterCommand& command, const Dataset& train,
                                                       const Dataset& query, std::uint64_t seed);

// Family backed by an external command. fit() only records the training
// block; every predict_all() call launches one child.
class ExternalFamily final : public ClassifierFamily {
public:
    explicit ExternalFamily(AdapterCommand command);

    std::unique_ptr<TrainedModel> fit(const Dataset& data, std::uint64_t seed) const override;
    FamilyDescriptor descriptor() const override;
    std::optional<double> known_vc_dimension(std::size_t) const override { return std::nullopt; }
    const AdapterCommand& command() const noexcept { return command_; }

private:
    AdapterCommand command_;
};

// Server side of the protocol: reads one TRAIN/PREDICT exchange from `in`,
// trains `family` and writes the reply to `out`. Returns false (after writing
// a message to `err`) on malformed input.
bool serve_adapter_protocol(std::istream& in, std::ostream& out, std::ostream& err,
                            const ClassifierFamily& family);

}  // namespace vcprobe
