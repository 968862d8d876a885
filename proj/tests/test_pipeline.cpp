#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "descfm/errors.hpp"
#include "descfm/pipeline.hpp"
#include "oracles.hpp"

using namespace descfm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("descfm_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return (path / name).string();
  }
};

std::string smoke(const std::string& name) { return oracle::data_path("smoke/" + name); }

BenchmarkSpec logp_spec() {
  BenchmarkSpec s;
  s.id = "logp";
  s.dataset = smoke("logp.csv");
  s.metric = "rmse";
  s.cliff_column = "is_cliff";
  return s;
}

}  // namespace

TEST_CASE("config JSON round-trips and rejects bad input") {
  FinetuneConfig f;
  f.epochs = 7;
  f.lr_mp = 3e-5;
  f.freeze_mp = true;
  f.task = Task::BinaryClassification;
  const auto back = apply_json(FinetuneConfig{}, to_json(f), "t");
  CHECK(back.epochs == 7);
  CHECK(back.lr_mp == 3e-5);
  CHECK(back.freeze_mp);
  CHECK(back.task == Task::BinaryClassification);

  PretrainConfig p;
  p.mask_fraction = 0.25;
  p.use_random_mask = false;
  const auto pb = apply_json(PretrainConfig{}, to_json(p), "t");
  CHECK(pb.mask_fraction == 0.25);
  CHECK_FALSE(pb.use_random_mask);

  BaselineConfig b;
  b.hidden = 17;
  CHECK(apply_json(BaselineConfig{}, to_json(b), "t").hidden == 17);

  // partial objects keep the defaults
  CHECK(apply_json(BaselineConfig{}, json{{"epochs", 3}}, "t").hidden == BaselineConfig{}.hidden);

  CHECK_THROWS_AS(apply_json(FinetuneConfig{}, json{{"epoch", 3}}, "t"), InputError);
  CHECK_THROWS_AS(apply_json(FinetuneConfig{}, json{{"epochs", -3}}, "t"), InputError);
  CHECK_THROWS_AS(apply_json(FinetuneConfig{}, json{{"epochs", 2.5}}, "t"), InputError);
  CHECK_THROWS_AS(apply_json(FinetuneConfig{}, json{{"lr_head", "fast"}}, "t"), InputError);
  CHECK_THROWS_AS(apply_json(FinetuneConfig{}, json{{"task", "ranking"}}, "t"), InputError);
  CHECK_THROWS_AS(apply_json(MpnnConfig{}, json::array(), "t"), InputError);
  CHECK_THROWS_WITH_AS(apply_json(BaselineConfig{}, json{{"widht", 3}}, "roster.json"),
                       doctest::Contains("unknown key 'widht'"), InputError);
}

TEST_CASE("suite files resolve datasets and validate fields") {
  TempDir d("suite");
  const auto path = d.write("suite.json", R"([
    {"id": "a", "dataset": "a.csv", "task": "regression", "metric": "r2"},
    {"id": "b", "dataset": "/abs/b.csv", "task": "binary_classification", "metric": "average_precision"},
    {"id": "c", "dataset": "c.csv", "task": "regression", "metric": "mae", "orientation": "higher_better",
     "cliff_column": "cl"}])");
  const auto s = read_suite_json(path);
  REQUIRE(s.size() == 3);
  CHECK(s[0].dataset == (d.path / "a.csv").string());
  CHECK(s[0].orientation == Orientation::HigherBetter);
  CHECK(s[1].dataset == "/abs/b.csv");
  CHECK(s[1].task == Task::BinaryClassification);
  CHECK(s[2].orientation == Orientation::HigherBetter);
  CHECK(s[2].cliff_column == "cl");
  CHECK_FALSE(s[0].cliff_column);

  auto bad = [&](const std::string& text) {
    return read_suite_json(d.write("bad.json", text));
  };
  CHECK_THROWS_AS(bad("[]"), InputError);
  CHECK_THROWS_AS(bad("{"), InputError);
  CHECK_THROWS_AS(bad(R"([{"id": "a", "dataset": "x.csv", "task": "regression", "metric": "roc_auc"}])"), InputError);
  CHECK_THROWS_AS(bad(R"([{"id": "a", "dataset": "x.csv", "task": "binary_classification", "metric": "rmse"}])"),
                  InputError);
  CHECK_THROWS_AS(bad(R"([{"id": "a", "dataset": "x.csv", "task": "binary_classification", "metric": "roc_auc",
                          "cliff_column": "c"}])"),
                  InputError);
  CHECK_THROWS_AS(bad(R"([{"id": "a", "dataset": "x.csv", "task": "regression", "metric": "rmse"},
                          {"id": "a", "dataset": "y.csv", "task": "regression", "metric": "rmse"}])"),
                  InputError);
  CHECK_THROWS_AS(bad(R"([{"id": "a,b", "dataset": "x.csv", "task": "regression", "metric": "rmse"}])"), InputError);
  CHECK_THROWS_AS(bad(R"([{"id": "a", "task": "regression", "metric": "rmse"}])"), InputError);
  CHECK_THROWS_AS(bad(R"([{"id": "a", "dataset": "x.csv", "task": "regression", "metric": "rmse", "extra": 1}])"),
                  InputError);
  CHECK_THROWS_AS(read_suite_json((d.path / "missing.json").string()), InputError);
}

TEST_CASE("roster files validate kinds and options eagerly") {
  TempDir d("roster");
  const auto path = d.write("roster.json", R"([
    {"id": "ft", "kind": "finetune", "checkpoint": "m.chmc", "options": {"epochs": 2}},
    {"id": "sc", "kind": "scratch", "arch": {"hidden_size": 8}},
    {"id": "fnn", "kind": "descriptor_fnn"},
    {"id": "pca", "kind": "pcamlp", "projector": "p.chmc"}])");
  const auto r = read_roster_json(path);
  REQUIRE(r.size() == 4);
  CHECK(r[0].checkpoint == (d.path / "m.chmc").string());
  CHECK(r[0].options.at("epochs") == 2);
  CHECK(r[1].arch.at("hidden_size") == 8);
  CHECK(r[2].projector.empty());
  CHECK(r[3].projector == (d.path / "p.chmc").string());

  auto bad = [&](const std::string& text) {
    return read_roster_json(d.write("bad.json", text));
  };
  CHECK_THROWS_AS(bad(R"([{"id": "x", "kind": "svm"}])"), InputError);
  CHECK_THROWS_AS(bad(R"([{"id": "x", "kind": "finetune"}])"), InputError);
  CHECK_THROWS_AS(bad(R"([{"id": "x", "kind": "descriptor_fnn", "arch": {"depth": 2}}])"), InputError);
  CHECK_THROWS_AS(bad(R"([{"id": "x", "kind": "scratch", "arch": {"depht": 2}}])"), InputError);
  CHECK_THROWS_AS(bad(R"([{"id": "x", "kind": "scratch", "options": {"hidden": 2}}])"), InputError);
  CHECK_THROWS_AS(bad(R"([{"id": "x", "kind": "pcamlp", "options": {"lr_head": 0.1}}])"), InputError);
  CHECK_THROWS_AS(bad(R"([{"id": "x", "kind": "pcamlp"}, {"id": "x", "kind": "scratch"}])"), InputError);
  CHECK_THROWS_AS(bad(R"([{"kind": "pcamlp"}])"), InputError);
  CHECK_THROWS_AS(bad(R"([{"id": "x", "kind": "pcamlp", "options": {"hidden": 0}}])"), InputError);
  CHECK_THROWS_AS(bad(R"([{"id": "x", "kind": "scratch", "options": {"val_fraction": 0.9}}])"), InputError);
}

TEST_CASE("load_benchmark splits rows and reads cliff labels") {
  const auto b = load_benchmark(logp_spec());
  CHECK(b.mols.size() == 120);
  CHECK(b.labels.size() == 120);
  CHECK(b.raw.rows == 120);
  CHECK(b.train.size() + b.test.size() == 120);
  CHECK(b.test.size() == 40);
  REQUIRE(b.cliff.size() == 120);
  std::size_t cliff_test = 0;
  for (std::size_t i : b.test) cliff_test += b.cliff[i];
  CHECK(cliff_test > 0);
  CHECK(cliff_test < b.test.size());
}

TEST_CASE("load_benchmark rejects unusable datasets") {
  TempDir d("bench");
  BenchmarkSpec s;
  s.id = "x";
  s.metric = "rmse";
  auto load = [&](const std::string& csv) {
    s.dataset = d.write("x.csv", csv);
    return load_benchmark(s);
  };
  CHECK_NOTHROW(load("smiles,target,split\nCC,1,train\nCCC,2,train\nCCO,3,test\nCCN,4,test\n"));
  CHECK_THROWS_AS(load("smiles,target\nCC,1\nCCC,2\n"), InputError);
  CHECK_THROWS_AS(load("smiles,target,split\nCC,1,train\nCCC,2,val\n"), InputError);
  CHECK_THROWS_AS(load("smiles,target,split\nCC,1,train\nCCC,2,train\n"), InputError);
  CHECK_THROWS_WITH_AS(load("smiles,target,split\nCC,1,train\nC1CC,2,test\n"), doctest::Contains("row 2"), InputError);

  s.metric = "r2";
  CHECK_THROWS_AS(load("smiles,target,split\nCC,1,train\nCCC,2,test\nCCO,2,test\n"), InputError);

  s.metric = "roc_auc";
  s.task = Task::BinaryClassification;
  CHECK_THROWS_AS(load("smiles,target,split\nCC,1,train\nCCC,0,train\nCCO,1,test\nCCN,1,test\n"), InputError);

  s.metric = "rmse";
  s.task = Task::Regression;
  s.cliff_column = "cl";
  CHECK_NOTHROW(load("smiles,target,split,cl\nCC,1,train,0\nCCC,2,test,true\nCCO,3,test,0\n"));
  CHECK_THROWS_AS(load("smiles,target,split,cl\nCC,1,train,0\nCCC,2,test,yes\nCCO,3,test,0\n"), InputError);
  CHECK_THROWS_AS(load("smiles,target,split,cl\nCC,1,train,1\nCCC,2,test,0\nCCO,3,test,0\n"), InputError);
  CHECK_THROWS_AS(load("smiles,target,split\nCC,1,train\nCCC,2,test\n"), InputError);
}

TEST_CASE("run_suite returns job-ordered rows independent of the worker count") {
  const std::vector<BenchmarkData> benches{load_benchmark(logp_spec())};
  ModelSpec scratch;
  scratch.id = "scratch";
  scratch.kind = "scratch";
  scratch.arch = {{"hidden_size", 16}, {"depth", 2}, {"ffn_hidden", 16}};
  scratch.options = {{"epochs", 3}};
  ModelSpec fnn;
  fnn.id = "fnn";
  fnn.kind = "descriptor_fnn";
  fnn.options = {{"hidden", 16}, {"epochs", 3}};
  ModelSpec pca;
  pca.id = "pca";
  pca.kind = "pcamlp";
  pca.options = {{"hidden", 16}, {"epochs", 3}};
  const std::vector<LoadedModel> models{load_model(scratch), load_model(fnn), load_model(pca)};

  SuiteOptions one;
  one.replicates = 2;
  SuiteOptions three = one;
  three.workers = 3;
  const auto a = run_suite(benches, models, one);
  const auto b = run_suite(benches, models, three);
  REQUIRE(a.size() == 6);
  REQUIRE(b.size() == 6);
  const std::vector<std::string> order{"scratch", "scratch", "fnn", "fnn", "pca", "pca"};
  for (std::size_t i = 0; i < a.size(); ++i) {
    CAPTURE(i);
    CHECK(a[i].model == order[i]);
    CHECK(a[i].seed == 1 + i % 2);
    CHECK(a[i].benchmark == "logp");
    CHECK(a[i].orientation == Orientation::LowerBetter);
    CHECK(a[i].value == b[i].value);
    REQUIRE(a[i].rmse_cliff);
    REQUIRE(a[i].rmse_noncliff);
    CHECK(*a[i].rmse_cliff == *b[i].rmse_cliff);
    CHECK(std::isfinite(a[i].value));
  }
  // different seeds give different fits
  CHECK(a[0].value != a[1].value);

  SuiteOptions none;
  none.replicates = 0;
  CHECK_THROWS_AS(run_suite(benches, models, none), std::invalid_argument);
}

TEST_CASE("a failing replicate names the benchmark, model and seed") {
  TempDir d("fail");
  BenchmarkSpec s;
  s.id = "tiny";
  s.metric = "rmse";
  s.dataset = d.write("tiny.csv", "smiles,target,split\nCC,1,train\nCCC,2,train\nCCO,3,test\nCCN,4,test\n");
  ModelSpec fnn;
  fnn.id = "fnn";
  fnn.kind = "descriptor_fnn";
  SuiteOptions opt;
  opt.replicates = 2;
  opt.workers = 2;
  // two training rows is below the minimum
  CHECK_THROWS_WITH_AS(run_suite({load_benchmark(s)}, {load_model(fnn)}, opt), doctest::Contains("tiny/fnn seed 1"),
                       InputError);
}
