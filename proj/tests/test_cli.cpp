// Copyright 2026 The lbpursuit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs the lbp executable as a subprocess.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#ifndef LBP_CLI
#error "LBP_CLI must name the lbp executable"
#endif
#ifndef LBP_TEST_DATA
#error "LBP_TEST_DATA must point at tests/data"
#endif

namespace fs = std::filesystem;

namespace
{

const fs::path kDir = fs::temp_directory_path() / "lbp_cli_test";

int run(const std::string& args)
{
    const std::string cmd = std::string(LBP_CLI) + " " + args + " > " + (kDir / "stdout.txt").string() + " 2> " +
                            (kDir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> numbers(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<double> out;
    for (double v; in >> v;) {
        out.push_back(v);
    }
    return out;
}

std::string data(const char* name)
{
    return (fs::path(LBP_TEST_DATA) / name).string();
}

struct Fresh {
    Fresh()
    {
        fs::remove_all(kDir);
        fs::create_directories(kDir);
    }
};

}  // namespace

TEST_SUITE("cli")
{
    TEST_CASE_FIXTURE(Fresh, "assemble: tetrahedron mass and stiffness rows")
    {
        REQUIRE(run("assemble --mesh " + data("tetrahedron.off") + " --out " + (kDir / "ops").string()) == 0);
        const auto mass = numbers(kDir / "ops/mass.txt");
        CHECK(mass.size() == 4);
        // Regular tetrahedron with edge 2 sqrt 2: four faces of area 2 sqrt 3.
        CHECK(std::accumulate(mass.begin(), mass.end(), 0.0) == doctest::Approx(8.0 * std::sqrt(3.0)));
        const auto trip = numbers(kDir / "ops/stiffness.txt");
        REQUIRE(trip.size() % 3 == 0);
        std::vector<double> rows(4, 0.0);
        for (std::size_t i = 0; i < trip.size(); i += 3) {
            rows[static_cast<std::size_t>(trip[i])] += trip[i + 2];
        }
        for (double r : rows) {
            CHECK(std::abs(r) <= 1e-12);
        }
    }

    TEST_CASE_FIXTURE(Fresh, "missing input file exits with 2 and a message")
    {
        CHECK(run("assemble --mesh " + (kDir / "none.off").string() + " --out " + (kDir / "x").string()) == 2);
        CHECK(slurp(kDir / "stderr.txt").find("cannot open") != std::string::npos);
    }

    TEST_CASE_FIXTURE(Fresh, "usage errors exit with 2")
    {
        CHECK(run("") == 2);
        CHECK(run("frobnicate") == 2);
        CHECK(run("eigs --mesh " + data("icosahedron.off")) == 2);
        CHECK(run("--help") == 0);
    }

    TEST_CASE_FIXTURE(Fresh, "eigs on the unit sphere")
    {
        REQUIRE(run("synth --subdivisions 3 --landmarks 4 --out " + (kDir / "s").string()) == 0);
        REQUIRE(run("eigs --mesh " + (kDir / "s/source.off").string() + " --k 4 --out " + (kDir / "e").string()) == 0);
        const auto values = numbers(kDir / "e/eigenvalues.txt");
        REQUIRE(values.size() == 4);
        CHECK(std::abs(values[0]) <= 1e-8);
        for (int i = 1; i < 4; ++i) {
            CHECK(std::abs(values[static_cast<std::size_t>(i)] - 2.0) / 2.0 <= 0.03);
        }
        const auto basis = numbers(kDir / "e/basis.txt");
        CHECK(basis.size() == 2 + 642 * 4);
        CHECK(run("eigs --mesh " + (kDir / "s/source.off").string() + " --k 642 --out " + (kDir / "e").string()) == 2);
    }

    TEST_CASE_FIXTURE(Fresh, "map: identical and permuted bases, and a shape mismatch")
    {
        std::ofstream(kDir / "a.txt") << "3 2\n1 0\n0 1\n-1 -1\n";
        std::ofstream(kDir / "b.txt") << "3 2\n-1 -1\n1 0\n0 1\n";
        std::ofstream(kDir / "c.txt") << "3 3\n1 0 0\n0 1 0\n0 0 1\n";
        REQUIRE(run("map --source-basis " + (kDir / "a.txt").string() + " --target-basis " +
                    (kDir / "a.txt").string() + " --out " + (kDir / "m1.txt").string()) == 0);
        CHECK(numbers(kDir / "m1.txt") == std::vector<double>{0, 1, 2});
        REQUIRE(run("map --source-basis " + (kDir / "a.txt").string() + " --target-basis " +
                    (kDir / "b.txt").string() + " --out " + (kDir / "m2.txt").string()) == 0);
        CHECK(numbers(kDir / "m2.txt") == std::vector<double>{1, 2, 0});
        CHECK(run("map --source-basis " + (kDir / "a.txt").string() + " --target-basis " +
                  (kDir / "c.txt").string() + " --out " + (kDir / "m3.txt").string()) == 2);
    }

    TEST_CASE_FIXTURE(Fresh, "eval: true map, curve and summary schema, batch mode")
    {
        REQUIRE(run("synth --subdivisions 2 --out " + (kDir / "s").string()) == 0);
        const std::string gt = (kDir / "s/ground_truth.txt").string();
        REQUIRE(run("eval --mesh " + (kDir / "s/target.off").string() + " --map " + gt + " --gt " + gt + " --out " +
                    (kDir / "ev").string()) == 0);
        const auto j = nlohmann::json::parse(slurp(kDir / "ev/summary.json"));
        for (const char* key : {"exact_fraction", "frac_le_005", "mean", "median"}) {
            CHECK(j.contains(key));
        }
        CHECK(j["exact_fraction"].get<double>() == 1.0);
        std::ifstream curve(kDir / "ev/curve.csv");
        std::string line;
        std::getline(curve, line);
        CHECK(line == "x,fraction");
        double prev = -1.0;
        double last = 0.0;
        while (std::getline(curve, line)) {
            last = std::stod(line.substr(line.find(',') + 1));
            CHECK(last >= prev);
            prev = last;
        }
        CHECK(last == 1.0);

        std::ofstream batch(kDir / "jobs.txt");
        for (int i = 0; i < 3; ++i) {
            batch << (kDir / "s/target.off").string() << ' ' << gt << ' ' << gt << ' '
                  << (kDir / ("b" + std::to_string(i))).string() << '\n';
        }
        batch.close();
        CHECK(run("eval --batch " + (kDir / "jobs.txt").string() + " --jobs 2") == 0);
        for (int i = 0; i < 3; ++i) {
            CHECK(fs::exists(kDir / ("b" + std::to_string(i)) / "summary.json"));
        }
    }

    TEST_CASE_FIXTURE(Fresh, "eval on a disconnected target exits with 3")
    {
        std::ofstream(kDir / "two.off") << "OFF\n6 2 0\n0 0 0\n1 0 0\n0 1 0\n5 0 0\n6 0 0\n5 1 0\n3 0 1 2\n3 3 4 5\n";
        std::ofstream(kDir / "id.txt") << "0\n1\n2\n3\n4\n5\n";
        CHECK(run("eval --mesh " + (kDir / "two.off").string() + " --map " + (kDir / "id.txt").string() + " --gt " +
                  (kDir / "id.txt").string() + " --out " + (kDir / "ev").string()) == 3);
    }

    TEST_CASE_FIXTURE(Fresh, "synth: perturbed landmarks and determinism")
    {
        REQUIRE(run("synth --subdivisions 3 --perturb 0.5 --seed 4 --out " + (kDir / "a").string()) == 0);
        REQUIRE(run("synth --subdivisions 3 --perturb 0.5 --seed 4 --out " + (kDir / "b").string()) == 0);
        CHECK(slurp(kDir / "a/landmarks.txt") == slurp(kDir / "b/landmarks.txt"));
        const auto marks = numbers(kDir / "a/landmarks.txt");
        int moved = 0;
        for (std::size_t i = 0; i < marks.size(); i += 2) {
            moved += marks[i] != marks[i + 1];
        }
        CHECK(moved == 10);
        CHECK(run("synth --scale -1 --out " + (kDir / "c").string()) == 2);
    }

    TEST_CASE_FIXTURE(Fresh, "defaults print a parseable config")
    {
        REQUIRE(run("defaults") == 0);
        const std::string text = slurp(kDir / "stdout.txt");
        CHECK(text.find("r1 = 10") != std::string::npos);
        CHECK(text.find("max_outer = 500") != std::string::npos);
        std::ofstream(kDir / "d.cfg") << text;
    }

    TEST_CASE_FIXTURE(Fresh, "solve: outputs, determinism, exit code 4 on budget exhaustion")
    {
        // Default identity pair: 642-vertex sphere, 20 landmarks, k = 100.
        REQUIRE(run("synth --out " + (kDir / "s").string()) == 0);
        std::ofstream(kDir / "run.cfg") << "source = s/source.off\ntarget = s/target.off\nlandmarks = s/landmarks.txt\n"
                                           "verbosity = 0\nout = first\n";
        REQUIRE(run("solve --config " + (kDir / "run.cfg").string()) == 0);
        CHECK(fs::exists(kDir / "first/w.txt"));
        CHECK(fs::exists(kDir / "first/history.csv"));
        REQUIRE(run("solve --config " + (kDir / "run.cfg").string() + " --out " + (kDir / "second").string()) == 0);
        CHECK(slurp(kDir / "first/correspondence.txt") == slurp(kDir / "second/correspondence.txt"));

        // Identical meshes: w^2 stays within 2% of the area ratio 1.
        const auto w = numbers(kDir / "first/w.txt");
        REQUIRE(w.size() == 642);
        double worst = 0;
        for (double v : w) {
            worst = std::max(worst, std::abs(v * v - 1.0));
        }
        CHECK(worst <= 0.02);

        // History: total (+ prox) never exceeds the reference of its step.
        std::ifstream hist(kDir / "first/history.csv");
        std::string line;
        std::getline(hist, line);
        CHECK(line.rfind("iteration,coefficient_term,eigen_term,harmonic_term,area_residual,total", 0) == 0);
        while (std::getline(hist, line)) {
            std::vector<double> f;
            std::stringstream ss(line);
            for (std::string cell; std::getline(ss, cell, ',');) {
                f.push_back(std::stod(cell));
            }
            REQUIRE(f.size() >= 9);
            CHECK(f[5] + f[7] <= f[8] + 1e-10);
        }

        CHECK(run("solve --config " + (kDir / "run.cfg").string() + " --set max_outer=2 --out " +
                  (kDir / "third").string()) == 4);
        CHECK(fs::exists(kDir / "third/w.txt"));
        CHECK(run("solve --config " + (kDir / "missing.cfg").string()) == 2);
    }

    TEST_CASE_FIXTURE(Fresh, "solve with reinitialization logs accepted events only when energy drops")
    {
        REQUIRE(run("synth --subdivisions 2 --out " + (kDir / "s").string()) == 0);
        std::ofstream(kDir / "run.cfg") << "source = s/source.off\ntarget = s/target.off\nlandmarks = s/landmarks.txt\n"
                                           "k = 15\nverbosity = 0\nreinit = true\nstall_window = 3\nmax_reinit = 2\n"
                                           "out = r\n";
        const int rc = run("solve --config " + (kDir / "run.cfg").string());
        CHECK((rc == 0 || rc == 4));
        std::ifstream log(kDir / "r/reinit.csv");
        std::string line;
        std::getline(log, line);
        CHECK(line == "iteration,before,after,accepted");
        int events = 0;
        while (std::getline(log, line)) {
            ++events;
            std::vector<double> f;
            std::stringstream ss(line);
            for (std::string cell; std::getline(ss, cell, ',');) {
                f.push_back(std::stod(cell));
            }
            REQUIRE(f.size() == 4);
            CHECK((f[3] == 1.0) == (f[2] <= f[1]));
        }
        CHECK(events == 2);
    }
}
