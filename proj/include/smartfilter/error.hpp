#pragma once

#include <stdexcept>
#include <string>

namespace smartfilter {

/// Malformed or unreadable input: bad file, parse failure, violated
/// invariant of a loaded value. The CLI maps this to exit status 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A filter step found an example without the predictions it needs.
/// The CLI maps this to exit status 1.
class CoverageError : public Error {
public:
    CoverageError(const std::string& model, const std::string& example_id)
        : Error("model '" + model + "' has no prediction for example '" + example_id + "'"),
          model_(model), example_id_(example_id) {}

    const std::string& model() const { return model_; }
    const std::string& example_id() const { return example_id_; }

private:
    std::string model_;
    std::string example_id_;
};

}  // namespace smartfilter
