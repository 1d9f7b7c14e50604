// focal-demogen: writes the built-in desk-scale model and its synthetic
// blob dataset so the focal pipeline can be exercised end to end.

#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "focal/dataset.hpp"
#include "focal/manifest.hpp"
#include "focal/zoo.hpp"

int main(int argc, char** argv) {
    CLI::App app{"generate the demo model and dataset", "focal-demogen"};
    std::string out_dir = "demo";
    std::size_t per_class = 10;
    unsigned seed = 7;
    app.add_option("--out", out_dir, "output directory (default: demo)");
    app.add_option("--per-class", per_class, "samples per class (default: 10)");
    app.add_option("--seed", seed, "dataset RNG seed");
    CLI11_PARSE(app, argc, argv);

    const std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);

    focal::model_save(focal::desk_cnn(), out / "desk6.json");
    focal::dataset_save(focal::blob_dataset(per_class, seed), out / "data");

    std::printf("wrote %s and %s (%zu samples)\n", (out / "desk6.json").string().c_str(),
                (out / "data").string().c_str(), per_class * 4);
    return 0;
}
