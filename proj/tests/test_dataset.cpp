#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "doctest.h"
#include "somefs/dataset.hpp"
#include "somefs/errors.hpp"
#include "somefs/rng.hpp"
#include "somefs/synthetic.hpp"

using namespace somefs;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/somefs_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

Dataset tiny_dataset() {
    Dataset ds;
    ds.features = Matrix(4, 2);
    double vals[4][2] = {{1, 10}, {2, 20}, {3, 30}, {4, 40}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) ds.features(i, j) = vals[i][j];
    ds.labels = {0, 1, 0, 1};
    ds.feature_names = {"a", "b"};
    ds.class_names = {"x", "y"};
    return ds;
}

}  // namespace

TEST_CASE("load_csv parses features and first-occurrence class order") {
    TempFile f("load.csv");
    write_file(f.path, "a,b,label\n1.0,2.0,pos\n3.0,4.0,neg\n5.5,6.5,pos\n");
    Dataset ds = load_csv(f.path, "label");
    CHECK(ds.n() == 3);
    CHECK(ds.dims() == 2);
    CHECK(ds.class_names == std::vector<std::string>{"pos", "neg"});
    CHECK(ds.labels == std::vector<int>{0, 1, 0});
    CHECK(ds.features(2, 1) == doctest::Approx(6.5));
}

TEST_CASE("load_csv label column by index and in the middle") {
    TempFile f("load_mid.csv");
    write_file(f.path, "a,cls,b\n1,u,2\n3,v,4\n");
    Dataset by_name = load_csv(f.path, "cls");
    CHECK(by_name.feature_names == std::vector<std::string>{"a", "b"});
    Dataset by_index = load_csv(f.path, "1");
    CHECK(by_index.labels == std::vector<int>{0, 1});
}

TEST_CASE("load_csv error paths") {
    CHECK_THROWS_AS(load_csv("/tmp/definitely_missing_somefs.csv", "label"), DataError);

    TempFile f("bad_cell.csv");
    write_file(f.path, "a,b,label\n1.0,oops,pos\n2.0,3.0,neg\n");
    CHECK_THROWS_WITH_AS(load_csv(f.path, "label"),
                         doctest::Contains("column 'b'"), DataError);

    TempFile g("one_class.csv");
    write_file(g.path, "a,b,label\n1,2,a\n");
    CHECK_THROWS_AS(load_csv(g.path, "label"), DataError);

    TempFile h("no_label.csv");
    write_file(h.path, "a,b,c\n1,2,3\n");
    CHECK_THROWS_AS(load_csv(h.path, "nope"), DataError);
}

TEST_CASE("csv round-trip preserves features and labels") {
    Dataset ds = make_blob_benchmark(50, 6, 99);
    TempFile f("roundtrip.csv");
    save_csv(ds, f.path, "label");
    Dataset back = load_csv(f.path, "label");
    REQUIRE(back.n() == ds.n());
    REQUIRE(back.dims() == ds.dims());
    CHECK(back.features == ds.features);
    CHECK(back.labels == ds.labels);
    CHECK(back.class_names == ds.class_names);
}

TEST_CASE("standardize gives zero mean, unit std, constant guard") {
    Dataset ds = tiny_dataset();
    ds.features(0, 1) = 7;
    ds.features(1, 1) = 7;
    ds.features(2, 1) = 7;
    ds.features(3, 1) = 7;
    auto [out, stats] = standardize(ds);

    double mean = 0;
    for (std::size_t i = 0; i < out.n(); ++i) mean += out.features(i, 0);
    mean /= 4.0;
    CHECK(std::fabs(mean) < 1e-9);
    double var = 0;
    for (std::size_t i = 0; i < out.n(); ++i)
        var += out.features(i, 0) * out.features(i, 0);
    var /= 4.0;
    CHECK(std::fabs(std::sqrt(var) - 1.0) < 1e-9);

    // constant column becomes zeros with std guard 1
    for (std::size_t i = 0; i < out.n(); ++i) CHECK(out.features(i, 1) == 0.0);
    CHECK(stats.mean[1] == doctest::Approx(7.0));
    CHECK(stats.std[1] == 1.0);
}

TEST_CASE("standardize single sample -> all zeros") {
    Dataset ds;
    ds.features = Matrix(1, 3);
    ds.features(0, 0) = 5;
    ds.features(0, 1) = -2;
    ds.features(0, 2) = 0.25;
    ds.labels = {0};
    ds.feature_names = {"a", "b", "c"};
    ds.class_names = {"x", "y"};
    auto [out, stats] = standardize(ds);
    for (std::size_t d = 0; d < 3; ++d) CHECK(out.features(0, d) == 0.0);
}

TEST_CASE("standardize is idempotent") {
    Dataset ds = make_blob_benchmark(200, 7, 5);
    auto [once, s1] = standardize(ds);
    auto [twice, s2] = standardize(once);
    for (std::size_t i = 0; i < ds.n(); ++i)
        for (std::size_t d = 0; d < ds.dims(); ++d)
            CHECK(std::fabs(once.features(i, d) - twice.features(i, d)) < 1e-9);
}

TEST_CASE("add_gaussian_noise: deterministic, labels untouched, unit variance") {
    Dataset ds = make_blob_benchmark(10000, 10, 3);
    auto [std_ds, stats] = standardize(ds);
    Dataset a = add_gaussian_noise(std_ds, 42);
    Dataset b = add_gaussian_noise(std_ds, 42);
    CHECK(a.features == b.features);
    CHECK(a.labels == std_ds.labels);

    // n * D = 100,000 cells: sample variance of the added noise near 1
    double sum = 0, sq = 0;
    const double cells = static_cast<double>(ds.n() * ds.dims());
    for (std::size_t i = 0; i < ds.n(); ++i)
        for (std::size_t d = 0; d < ds.dims(); ++d) {
            const double e = a.features(i, d) - std_ds.features(i, d);
            sum += e;
            sq += e * e;
        }
    const double var = sq / cells - (sum / cells) * (sum / cells);
    CHECK(std::fabs(var - 1.0) < 0.02);

    Dataset c = add_gaussian_noise(std_ds, 43);
    CHECK(c.features.data() != a.features.data());
}

TEST_CASE("bootstrap invariants") {
    SUBCASE("n = 1") {
        BootstrapSample bs = bootstrap(std::size_t{1}, 7);
        CHECK(bs.in_bag == std::vector<std::size_t>{0});
        CHECK(bs.oob.empty());
    }
    SUBCASE("oob fraction near 1/e") {
        const std::size_t n = 10000;
        BootstrapSample bs = bootstrap(n, 1234);
        CHECK(bs.in_bag.size() == n);
        const double frac = static_cast<double>(bs.oob.size()) / static_cast<double>(n);
        CHECK(std::fabs(frac - std::exp(-1.0)) < 0.02);
        // oob disjoint from in-bag
        std::set<std::size_t> bag(bs.in_bag.begin(), bs.in_bag.end());
        for (std::size_t i : bs.oob) CHECK(bag.count(i) == 0);
        for (std::size_t i : bs.in_bag) CHECK(i < n);
    }
    SUBCASE("seed determinism") {
        BootstrapSample a = bootstrap(std::size_t{500}, 9);
        BootstrapSample b = bootstrap(std::size_t{500}, 9);
        CHECK(a.in_bag == b.in_bag);
        CHECK(a.oob == b.oob);
    }
}

TEST_CASE("kfold partitions and stratification") {
    SUBCASE("n=10 k=5 test sets of size 2 covering everything") {
        Dataset ds = make_blob_benchmark(10, 5, 1);
        FoldPlan plan = kfold(ds, 5, false, 11);
        std::set<std::size_t> covered;
        for (const auto& fold : plan.folds) {
            CHECK(fold.test.size() == 2);
            CHECK(fold.train.size() == 8);
            for (std::size_t i : fold.test) {
                CHECK(covered.count(i) == 0); // disjoint
                covered.insert(i);
            }
        }
        CHECK(covered.size() == 10);
    }
    SUBCASE("stratified 60/40 mix gives 12+-1 / 8+-1 per fold") {
        Dataset ds;
        ds.features = Matrix(100, 1);
        ds.feature_names = {"a"};
        ds.class_names = {"maj", "min"};
        for (int i = 0; i < 100; ++i) {
            ds.features(i, 0) = i;
            ds.labels.push_back(i < 60 ? 0 : 1);
        }
        FoldPlan plan = kfold(ds, 5, true, 3);
        CHECK(plan.stratified);
        for (const auto& fold : plan.folds) {
            int c0 = 0, c1 = 0;
            for (std::size_t i : fold.test) (ds.labels[i] == 0 ? c0 : c1)++;
            CHECK(std::abs(c0 - 12) <= 1);
            CHECK(std::abs(c1 - 8) <= 1);
        }
    }
    SUBCASE("k = n gives leave-one-out") {
        Dataset ds = make_blob_benchmark(8, 5, 2);
        FoldPlan plan = kfold(ds, 8, false, 1);
        for (const auto& fold : plan.folds) CHECK(fold.test.size() == 1);
    }
    SUBCASE("k > n throws; rare class falls back with warning") {
        Dataset ds = make_blob_benchmark(6, 5, 2);
        CHECK_THROWS_AS(kfold(ds, 7, false, 1), ConfigError);

        Dataset rare;
        rare.features = Matrix(10, 1);
        rare.feature_names = {"a"};
        rare.class_names = {"big", "tiny"};
        for (int i = 0; i < 10; ++i) {
            rare.features(i, 0) = i;
            rare.labels.push_back(i < 8 ? 0 : 1);
        }
        std::string warning;
        FoldPlan plan = kfold(rare, 5, true, 1, &warning);
        CHECK_FALSE(plan.stratified);
        CHECK(warning.find("tiny") != std::string::npos);
    }
}

TEST_CASE("dataset validate catches bad label range") {
    Dataset ds = tiny_dataset();
    ds.labels[2] = 9;
    CHECK_THROWS_AS(ds.validate(), DataError);
}
