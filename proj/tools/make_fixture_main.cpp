#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hema/fixtures.hpp"

namespace fs = std::filesystem;

// Generates the bundled toy fixture: two small synthetic dataset trees plus
// a ready-to-run pipeline config.
int main(int argc, char** argv) {
    CLI::App app{"generate the synthetic toy fixture for pipeline runs"};

    std::string out = "fixtures/toy";
    std::string comparison_rows = "data/comparison_rows.json";
    int images_per_class = 6;
    int image_size = 64;
    std::uint64_t seed = 7;
    app.add_option("--out", out, "fixture output directory");
    app.add_option("--comparison-rows", comparison_rows,
                   "comparison-rows data file to copy into the fixture");
    app.add_option("--images-per-class", images_per_class, "images per class directory");
    app.add_option("--image-size", image_size, "square image size in pixels");
    app.add_option("--seed", seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path root(out);
        hema::fixtures::ToyOptions options;
        options.images_per_class = images_per_class;
        options.image_size = image_size;
        options.seed = seed;
        hema::fixtures::write_toy_datasets(root, options);

        fs::copy_file(comparison_rows, root / "comparison_rows.json",
                      fs::copy_options::overwrite_existing);

        const auto config =
            hema::fixtures::toy_config(".", "run", "comparison_rows.json", seed);
        std::ofstream config_out(root / "config.json");
        config_out << config.dump(2) << "\n";

        std::cout << "fixture written to " << root.string() << "\n"
                  << "next: hemapipe prepare --config " << (root / "config.json").string() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "make_fixture: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
