#include "hema/backend.hpp"

#include "hema/reference_cnn.hpp"
#include "hema/rng.hpp"

namespace hema {

BackendRegistry& BackendRegistry::instance() {
    static BackendRegistry registry = [] {
        BackendRegistry r;
        r.register_backend("reference_cnn", [](const BackendOptions& options) {
            return std::make_unique<ReferenceCnn>(options);
        });
        // Detector-family adapters require an external runtime that is not
        // vendored; requesting them must fail loudly, not fall back.
        for (const char* name : {"yolov8s", "yolov11s"}) {
            r.register_backend(name, [name](const BackendOptions&) -> std::unique_ptr<ClassifierBackend> {
                throw BackendUnavailableError(
                    std::string("backend unavailable: '") + name +
                    "' needs an external detector runtime that is not present in this build");
            });
        }
        return r;
    }();
    return registry;
}

void BackendRegistry::register_backend(const std::string& name, BackendFactory factory) {
    factories_[name] = std::move(factory);
}

bool BackendRegistry::has(const std::string& name) const {
    return factories_.count(name) != 0;
}

std::vector<std::string> BackendRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : factories_) out.push_back(name);
    return out;
}

std::unique_ptr<ClassifierBackend> BackendRegistry::create(const std::string& name,
                                                           const BackendOptions& options) const {
    const auto it = factories_.find(name);
    if (it == factories_.end()) {
        std::string known;
        for (const auto& [key, _] : factories_) {
            if (!known.empty()) known += ", ";
            known += key;
        }
        throw std::runtime_error("unknown backend '" + name + "' (registered: " + known + ")");
    }
    return it->second(options);
}

std::unique_ptr<ClassifierBackend> load_backend(const std::string& name,
                                                const BackendOptions& options) {
    return BackendRegistry::instance().create(name, options);
}

std::uint64_t parameter_digest(const std::vector<ParameterGroup>& groups,
                               const std::string& tag_filter) {
    std::uint64_t h = 14695981039346656037ull;
    for (const auto& group : groups) {
        if (!tag_filter.empty() && group.tag != tag_filter) continue;
        h = fnv1a64(group.name, h);
        h = fnv1a64(group.values->data(), group.values->size() * sizeof(double), h);
    }
    return h;
}

}  // namespace hema
