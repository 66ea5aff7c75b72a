#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kgbayes/cli.hpp"
#include "kgbayes/dataset.hpp"
#include "kgbayes/numerics.hpp"

namespace fs = std::filesystem;
using kgbayes::cli::run;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("kgb_cli_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* kToyKb =
    "class A\nclass B\nclass C\nsubclass B A\nsubclass C A\ndisjoint B C\n"
    "role r\n"
    "instance x1 B\ninstance x2 C\ninstance x3 B\ninstance x4 C\n"
    "instance x5 B\ninstance x6 C\nindividual x7\nindividual x8\n"
    "rel r x1 x2\nrel r x3 x4\nrel r x7 x1\n";

}  // namespace

TEST_CASE("encode: happy path writes a loadable ternary CSV") {
    TempDir tmp;
    write_file(tmp.file("toy.kb"), kToyKb);
    CHECK(run({"encode", tmp.file("toy.kb"), "-o", tmp.file("toy.csv")}) == 0);
    kgbayes::Dataset ds = kgbayes::load_csv_file(tmp.file("toy.csv"));
    CHECK(ds.rows() == 8);
    CHECK(ds.dims() == 3);  // leaves B, C and the existential on r
    CHECK(ds.explicit_ids);
    CHECK(ds.row_ids[0] == "x1");
}

TEST_CASE("usage errors exit 1, data errors exit 2") {
    TempDir tmp;
    CHECK(run({"encode"}) == 1);                       // missing required args
    CHECK(run({"frobnicate"}) == 1);                   // unknown subcommand
    CHECK(run({"encode", "--bogus-flag", "x"}) == 1);  // unknown flag
    CHECK(run({"eval", "/nonexistent.kb", "-o", tmp.file("out")}) == 2);

    // Labels all positive: the module-level fit error surfaces as exit 2.
    write_file(tmp.file("allpos.csv"), "f1,label\n1,1\n0,1\n1,1\n");
    CHECK(run({"fit", tmp.file("allpos.csv"), "-o", tmp.file("m.json")}) == 2);
    CHECK(run({"--help"}) == 0);
}

TEST_CASE("fit + predict: posterior and decision columns, row count preserved") {
    TempDir tmp;
    write_file(tmp.file("train.csv"),
               "f1,f2,label\n1,0,1\n1,?,1\n1,1,1\n0,1,0\n?,1,0\n0,0,0\n1,0,1\n0,1,0\n");
    CHECK(run({"fit", tmp.file("train.csv"), "-o", tmp.file("m.json"), "--model", "mbnb",
               "--alpha", "1"}) == 0);
    write_file(tmp.file("test.csv"), "f1,f2\n1,0\n0,1\n?,?\n");
    CHECK(run({"predict", tmp.file("m.json"), tmp.file("test.csv"), "-o",
               tmp.file("pred.csv")}) == 0);
    std::string out = read_file(tmp.file("pred.csv"));
    std::istringstream lines(out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "f1,f2,posterior,decision");
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        auto last_comma = line.rfind(',');
        std::string decision = line.substr(last_comma + 1);
        CHECK((decision == "1" || decision == "0" || decision == "?"));
        auto prev_comma = line.rfind(',', last_comma - 1);
        double q = std::stod(line.substr(prev_comma + 1, last_comma - prev_comma - 1));
        CHECK(q >= 0.0);
        CHECK(q <= 1.0);
    }
    CHECK(rows == 3);
}

TEST_CASE("predict with a high theta can reject") {
    TempDir tmp;
    write_file(tmp.file("train.csv"), "f1,label\n1,1\n1,1\n0,1\n0,0\n1,0\n0,0\n");
    REQUIRE(run({"fit", tmp.file("train.csv"), "-o", tmp.file("m.json"), "--alpha", "1"}) == 0);
    write_file(tmp.file("test.csv"), "f1\n?\n");
    REQUIRE(run({"predict", tmp.file("m.json"), tmp.file("test.csv"), "-o", tmp.file("p.csv"),
                 "--theta", "0.99"}) == 0);
    std::string out = read_file(tmp.file("p.csv"));
    CHECK(out.find(",?\n") != std::string::npos);  // an all-unknown row gets rejected
}

TEST_CASE("rules: axiom and rule file for an mbnb model") {
    TempDir tmp;
    std::string train = "f1,f2,label\n";
    // f1 on for positives, f2 on for negatives.
    for (int i = 0; i < 30; ++i) train += i % 2 ? "1,0,1\n" : "0,1,0\n";
    write_file(tmp.file("train.csv"), train);
    REQUIRE(run({"fit", tmp.file("train.csv"), "-o", tmp.file("m.json"), "--alpha", "1"}) == 0);
    CHECK(run({"rules", tmp.file("m.json"), "-o", tmp.file("rules.txt"), "--theta", "0.9",
               "--target", "C"}) == 0);
    std::string text = read_file(tmp.file("rules.txt"));
    CHECK(text.find("# model: mbnb") != std::string::npos);
    CHECK(text.find("# theta: 0.9") != std::string::npos);
    CHECK(text.find("C SubClassOf: f1 and not f2") != std::string::npos);
    CHECK(text.find("IF C(x)") != std::string::npos);
    CHECK(text.find("IF not C(x)") != std::string::npos);
}

TEST_CASE("rules: disjunctive extraction for an hbm model needs --data") {
    TempDir tmp;
    std::string train = "f1,f2,label\n";
    for (int i = 0; i < 40; ++i) train += i % 2 ? "1,0,1\n" : "0,1,0\n";
    write_file(tmp.file("train.csv"), train);
    REQUIRE(run({"fit", tmp.file("train.csv"), "-o", tmp.file("h.json"), "--model", "hbm", "-K",
                 "2", "--restarts", "3"}) == 0);
    CHECK(run({"rules", tmp.file("h.json"), "-o", tmp.file("r.txt"), "--theta", "0.4"}) == 2);
    CHECK(run({"rules", tmp.file("h.json"), "-o", tmp.file("r.txt"), "--theta", "0.4", "--data",
               tmp.file("train.csv")}) == 0);
    std::string text = read_file(tmp.file("r.txt"));
    CHECK(text.find("# model: hbm") != std::string::npos);
    CHECK(text.find("z1 = 1 with probability") != std::string::npos);
}

TEST_CASE("fit is reproducible: identical model files for identical seeds") {
    TempDir tmp;
    std::string train = "f1,f2,f3,label\n";
    for (int i = 0; i < 30; ++i)
        train += i % 3 == 0 ? "1,?,0,1\n" : i % 3 == 1 ? "0,1,?,0\n" : "?,0,1,1\n";
    write_file(tmp.file("train.csv"), train);
    REQUIRE(run({"fit", tmp.file("train.csv"), "-o", tmp.file("a.json"), "--model", "hbm", "-K",
                 "2", "--restarts", "4", "--seed", "9"}) == 0);
    REQUIRE(run({"fit", tmp.file("train.csv"), "-o", tmp.file("b.json"), "--model", "hbm", "-K",
                 "2", "--restarts", "4", "--seed", "9"}) == 0);
    CHECK(read_file(tmp.file("a.json")) == read_file(tmp.file("b.json")));
}

TEST_CASE("fit mbnb-em with constant-imputation baseline flag combinations") {
    TempDir tmp;
    std::string train = "f1,f2,label\n1,?,1\n?,0,1\n1,1,1\n0,1,0\n0,?,0\n?,1,0\n1,0,1\n0,1,?\n";
    write_file(tmp.file("train.csv"), train);
    CHECK(run({"fit", tmp.file("train.csv"), "-o", tmp.file("em.json"), "--model", "mbnb-em"}) ==
          0);
    CHECK(run({"fit", tmp.file("train.csv"), "-o", tmp.file("c.json"), "--model", "mbnb",
               "--impute", "constant", "--prior", "0.5"}) == 0);
    CHECK(run({"fit", tmp.file("train.csv"), "-o", tmp.file("em2.json"), "--model", "mbnb-em",
               "--no-phase2", "--trace", tmp.file("trace.csv")}) == 0);
    std::string trace = read_file(tmp.file("trace.csv"));
    CHECK(trace.rfind("iteration,loglik\n", 0) == 0);

    // Remaining imputation strategies for the plain model.
    CHECK(run({"fit", tmp.file("train.csv"), "-o", tmp.file("i1.json"), "--model", "mbnb",
               "--impute", "em"}) == 0);
    CHECK(run({"fit", tmp.file("train.csv"), "-o", tmp.file("i2.json"), "--model", "mbnb",
               "--impute", "mixture", "-K", "2", "--restarts", "2"}) == 0);
    CHECK(run({"fit", tmp.file("train.csv"), "-o", tmp.file("i3.json"), "--model", "mbnb",
               "--impute", "bogus"}) == 2);
    CHECK(read_file(tmp.file("i1.json")).find("\"kind\":\"mbnb\"") != std::string::npos);
    CHECK(read_file(tmp.file("i2.json")).find("\"kind\":\"mbnb\"") != std::string::npos);
}

TEST_CASE("eval subcommand writes the report tree") {
    TempDir tmp;
    write_file(tmp.file("bench.kb"), [] {
        std::ostringstream kb;
        kb << "class T0\nclass A\nclass B\nclass C\nclass D\n";
        kb << "subclass A T0\nsubclass B T0\nsubclass C A\nsubclass D B\ndisjoint A B\n";
        kb << "role r\n";
        kgbayes::Rng rng(4);
        for (int i = 0; i < 50; ++i) kb << "individual y" << i << "\n";
        const char* leaves[] = {"C", "D"};
        for (int i = 0; i < 50; ++i) {
            if (rng.next_unit() < 0.7) kb << "instance y" << i << " " << leaves[rng.next_index(2)] << "\n";
            if (rng.next_unit() < 0.3) kb << "rel r y" << i << " y" << rng.next_index(50) << "\n";
        }
        return kb.str();
    }());
    CHECK(run({"eval", tmp.file("bench.kb"), "-o", tmp.file("out"), "--models", "mbnb,mbnb-em",
               "--folds", "3", "--problems", "2", "--min-pos", "5", "--min-neg", "5", "--seed",
               "3"}) == 0);
    CHECK(fs::exists(tmp.file("out") + "/summary.csv"));
    CHECK(fs::exists(tmp.file("out") + "/rank_test.txt"));
    CHECK(fs::exists(tmp.file("out") + "/problem_P01.csv"));
    std::string summary = read_file(tmp.file("out") + "/summary.csv");
    CHECK(summary.rfind("model,metric,mean,std\n", 0) == 0);
    CHECK(summary.find("mbnb-em,f1,") != std::string::npos);
}
