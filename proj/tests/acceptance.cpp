// Copyright 2026 The bml Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Runs every acceptance criterion and prints one PASS/FAIL line for each.
//
//     bml_acceptance [criterion ids...]
//
// Exit status is 0 when every selected criterion passes and 1 otherwise.

#include <bml/suite.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    bml::SuiteOptions opts;
    opts.progress = &std::cout;
    try {
        for (int i = 1; i < argc; ++i) opts.only.push_back(std::stoi(argv[i]));
    } catch (const std::exception&) {
        std::cerr << "usage: bml_acceptance [criterion ids...]\n";
        return 2;
    }
    try {
        const bml::SuiteReport rep = bml::run_acceptance(opts);
        std::size_t failed = 0;
        for (const auto& c : rep.criteria) failed += c.passed ? 0 : 1;
        std::cout << (rep.passed ? "ALL PASS" : std::to_string(failed) + " FAILED") << " (" << rep.criteria.size()
                  << " criteria)\n";
        return rep.passed ? 0 : 1;
    } catch (const bml::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
