#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef KRIGBENCH_PATH
#error "KRIGBENCH_PATH must point at the krigbench binary"
#endif

namespace fs = std::filesystem;

namespace {

struct Workdir {
  fs::path dir;
  Workdir() : dir(fs::temp_directory_path() / ("krig_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(dir);
  }
  ~Workdir() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

struct Run {
  int code = -1;
  std::string err;
};

Run krigbench(const Workdir& w, const std::string& args) {
  const std::string err = w.path("stderr.txt");
  const std::string cmd = std::string(KRIGBENCH_PATH) + " " + args + " > /dev/null 2> " + err;
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string training_csv() {
  std::string s = "x1,x2,y\n";
  for (int i = 0; i < 12; ++i) {
    const double a = (i + 0.5) / 12.0, b = ((i * 5) % 12 + 0.5) / 12.0;
    s += std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(a * a - b + 0.3 * a * b) + "\n";
  }
  return s;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("fit and predict round trip") {
    Workdir w;
    write_file(w.path("train.csv"), training_csv());
    REQUIRE(krigbench(w, "fit --data " + w.path("train.csv") + " --out " + w.path("m.model") + " --seed 3").code == 0);
    CHECK(fs::exists(w.path("m.model.diagnostics.json")));
    CHECK(fs::exists(w.path("m.model.manifest.json")));

    write_file(w.path("pts.csv"), "x1,x2\n0.1,0.2\n0.5,0.5\n");
    REQUIRE(krigbench(w, "predict --model " + w.path("m.model") + " --points " + w.path("pts.csv") + " --out " +
                             w.path("pred.csv"))
                .code == 0);
    const std::string pred = read_file(w.path("pred.csv"));
    CHECK(pred.rfind("x1,x2,yhat,mse\n", 0) == 0);
    CHECK(std::count(pred.begin(), pred.end(), '\n') == 3);

    // Same seed, same model file.
    REQUIRE(krigbench(w, "fit --data " + w.path("train.csv") + " --out " + w.path("m2.model") + " --seed 3").code == 0);
    CHECK(read_file(w.path("m.model")) == read_file(w.path("m2.model")));
  }

  TEST_CASE("input errors exit with 2") {
    Workdir w;
    write_file(w.path("bad.csv"), "x1,y\n0.1,1\n0.2,oops\n");
    const Run bad = krigbench(w, "fit --data " + w.path("bad.csv") + " --out " + w.path("m.model"));
    CHECK(bad.code == 2);
    CHECK(bad.err.find("line 3") != std::string::npos);

    write_file(w.path("short.csv"), "x1,y\n0.1,1\n0.2\n");
    const Run ragged = krigbench(w, "fit --data " + w.path("short.csv") + " --out " + w.path("m.model"));
    CHECK(ragged.code == 2);
    CHECK(ragged.err.find("line 3") != std::string::npos);

    write_file(w.path("empty.csv"), "");
    CHECK(krigbench(w, "eval-fn --function borehole --input " + w.path("empty.csv") + " --out " + w.path("o.csv"))
              .code == 2);

    CHECK(krigbench(w, "fit --data " + w.path("missing.csv") + " --out " + w.path("m.model")).code == 2);
    CHECK(krigbench(w, "benchmark --function nope --n 10 --out " + w.path("b")).code == 2);
    CHECK(krigbench(w, "benchmark --function otl --n 10 --profiles sk-joint --out " + w.path("b")).code == 2);
    CHECK(krigbench(w, "sk-mm1 --n2 3 --out " + w.path("s")).code == 2);
    CHECK(krigbench(w, "fit --data x.csv").code == 2);
    CHECK(krigbench(w, "no-such-command").code == 2);

    write_file(w.path("train.csv"), training_csv());
    CHECK(krigbench(w, "fit --data " + w.path("train.csv") + " --kernel rbf --out " + w.path("m.model")).code == 2);
    CHECK(krigbench(w, "fit --data " + w.path("train.csv") + " --nugget fixed:-1 --out " + w.path("m.model")).code ==
          2);
  }

  TEST_CASE("prediction with an empty points file writes only the header") {
    Workdir w;
    write_file(w.path("train.csv"), training_csv());
    REQUIRE(krigbench(w, "fit --data " + w.path("train.csv") + " --out " + w.path("m.model")).code == 0);
    write_file(w.path("pts.csv"), "x1,x2\n");
    REQUIRE(krigbench(w, "predict --model " + w.path("m.model") + " --points " + w.path("pts.csv") + " --out " +
                             w.path("pred.csv"))
                .code == 0);
    CHECK(read_file(w.path("pred.csv")) == "x1,x2,yhat,mse\n");

    write_file(w.path("wrong.csv"), "x1\n0.5\n");
    CHECK(krigbench(w, "predict --model " + w.path("m.model") + " --points " + w.path("wrong.csv") + " --out " +
                           w.path("pred.csv"))
              .code == 2);
  }

  TEST_CASE("numerical failures exit with 3") {
    // A hand-written model whose correlation matrix is singular: duplicate
    // rows and no nugget.
    Workdir w;
    write_file(w.path("sing.model"),
               "krig-model 1\nfamily powexp\nexponent 2\nparameterization theta\ndims 1\npoints 2\n"
               "degenerate 0\ntheta 1\nparams 1\nmu_hat 0\nsigma2_hat 1\nnugget_kind scalar\nnugget 0\n"
               "scale_mean 0\nscale_range 1\nscale_degenerate 0\nx 0.5\nx 0.5\ny 1 2\nend\n");
    write_file(w.path("pts.csv"), "x1\n0.5\n");
    const Run r = krigbench(w, "predict --model " + w.path("sing.model") + " --points " + w.path("pts.csv") +
                                   " --out " + w.path("pred.csv"));
    CHECK(r.code == 3);
  }

  TEST_CASE("gen-design and eval-fn") {
    Workdir w;
    REQUIRE(krigbench(w, "gen-design --n 7 --d 6 --seed 2 --iters 100 --out " + w.path("d.csv")).code == 0);
    REQUIRE(krigbench(w, "eval-fn --function otl --input " + w.path("d.csv") + " --out " + w.path("y.csv")).code == 0);
    const std::string y = read_file(w.path("y.csv"));
    CHECK(y.rfind("x1,x2,x3,x4,x5,x6,y\n", 0) == 0);
    CHECK(std::count(y.begin(), y.end(), '\n') == 8);
    REQUIRE(krigbench(w, "eval-fn --function otl --otl-literal --input " + w.path("d.csv") + " --out " +
                             w.path("yl.csv"))
                .code == 0);
    CHECK(read_file(w.path("yl.csv")) != y);
    CHECK(krigbench(w, "eval-fn --function borehole --input " + w.path("d.csv") + " --out " + w.path("o.csv")).code ==
          2);
  }
}
