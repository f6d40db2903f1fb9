#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hema/image.hpp"

namespace hema {

// Raised when a registered backend cannot run because its runtime
// dependency is missing; callers must never fall back silently.
struct BackendUnavailableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParameterGroup {
    std::string tag;   // "backbone" or "head"
    std::string name;  // e.g. "conv1.w"
    std::vector<double>* values = nullptr;
    std::vector<double>* grads = nullptr;
};

// Pluggable image classifier. Images are resized to input_resolution by
// the caller; predict returns normalized class scores.
class ClassifierBackend {
public:
    virtual ~ClassifierBackend() = default;

    virtual std::string name() const = 0;
    virtual int input_resolution() const = 0;
    virtual int num_classes() const = 0;

    virtual std::vector<double> predict(const Image& image) = 0;

    // Mean cross-entropy over the batch, forward only.
    virtual double batch_loss(const std::vector<const Image*>& images,
                              const std::vector<int>& labels) = 0;

    // Forward + backward; accumulates gradients and returns the mean loss.
    // correct, when given, receives the number of argmax hits.
    virtual double forward_backward(const std::vector<const Image*>& images,
                                    const std::vector<int>& labels,
                                    std::size_t* correct = nullptr) = 0;

    virtual void zero_grad() = 0;
    virtual std::vector<ParameterGroup> parameters() = 0;

    virtual void save_weights(const std::filesystem::path& dir) const = 0;
    virtual void load_weights(const std::filesystem::path& dir) = 0;
};

struct BackendOptions {
    int num_classes = 2;
    int input_resolution = 0;  // 0 = backend default
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> weights;  // pretrained weights to load
};

using BackendFactory = std::function<std::unique_ptr<ClassifierBackend>(const BackendOptions&)>;

class BackendRegistry {
public:
    static BackendRegistry& instance();

    void register_backend(const std::string& name, BackendFactory factory);
    bool has(const std::string& name) const;
    std::vector<std::string> names() const;
    std::unique_ptr<ClassifierBackend> create(const std::string& name,
                                              const BackendOptions& options) const;

private:
    std::map<std::string, BackendFactory> factories_;
};

// Entry point used by config and CLI. Unknown names list the registered
// backends in the error.
std::unique_ptr<ClassifierBackend> load_backend(const std::string& name,
                                                const BackendOptions& options);

std::uint64_t parameter_digest(const std::vector<ParameterGroup>& groups,
                               const std::string& tag_filter = "");

}  // namespace hema
