// Reference external classifier: serves one TRAIN/PREDICT exchange on
// stdin/stdout with a built-in family. Useful for testing adapters.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vcprobe/error.hpp"
#include "vcprobe/external_adapter.hpp"
#include "vcprobe/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"vcprobe-child: built-in classifier behind the external line protocol"};
    std::string family = "interval1d";
    bool complement = false;
    int restarts = 32;
    int epochs = 200;
    app.add_option("--family", family, "shatter | interval1d | linear | constant0 | constant1");
    app.add_flag("--complement", complement, "interval1d: include interval complements");
    app.add_option("--restarts", restarts, "linear: pocket restarts");
    app.add_option("--epochs", epochs, "linear: epochs per restart");
    CLI11_PARSE(app, argc, argv);

    try {
        vcprobe::FamilySpec spec;
        spec.name = family;
        spec.complement = complement;
        spec.budget = {restarts, epochs};
        if (family == "external") throw vcprobe::ConfigError("the child cannot wrap another external family");
        const auto impl = vcprobe::make_family(spec);
        std::ios::sync_with_stdio(false);
        return vcprobe::serve_adapter_protocol(std::cin, std::cout, std::cerr, *impl) ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
}
