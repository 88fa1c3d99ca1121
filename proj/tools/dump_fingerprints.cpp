// Prints a dataset's fingerprints as CSV (name,label,bit0,...) for external
// cross-checks of the forest.
#include <iostream>

#include "ronpaint/dataset.hpp"

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: dump_fingerprints DATA.csv PATTERNS.tsv\n";
        return 1;
    }
    try {
        const auto patterns = ronpaint::load_pattern_set(argv[2]);
        const auto data = ronpaint::load_dataset(argv[1], patterns);
        std::cout << "name,label";
        for (const auto& p : patterns.patterns) std::cout << ',' << p.id;
        std::cout << '\n';
        for (const auto& row : data.rows()) {
            std::cout << row.name << ',' << static_cast<int>(row.label);
            for (auto b : row.fingerprint.bits) std::cout << ',' << static_cast<int>(b);
            std::cout << '\n';
        }
    } catch (const ronpaint::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
