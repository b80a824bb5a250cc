#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "helpers.hpp"
#include "reliance/bundle.hpp"
#include "reliance/config.hpp"
#include "reliance/embed.hpp"
#include "reliance/errors.hpp"
#include "reliance/model_io.hpp"

using namespace reliance;
using namespace reliance::cli;

namespace {

std::vector<std::uint8_t> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("blob writer/reader round trip with little-endian layout") {
    BlobWriter w;
    w.put_u32(0x01020304u);
    w.put_f64(1.5);
    w.put_string("hej");
    w.put_i64(-7);
    w.put_f64_array(std::vector<double>{0.25, -0.5});

    const auto& bytes = w.bytes();
    CHECK(bytes[0] == 0x04);  // least significant byte first
    CHECK(bytes[1] == 0x03);
    CHECK(bytes[2] == 0x02);
    CHECK(bytes[3] == 0x01);

    BlobReader r(bytes);
    CHECK(r.get_u32() == 0x01020304u);
    CHECK(r.get_f64() == 1.5);
    CHECK(r.get_string() == "hej");
    CHECK(r.get_i64() == -7);
    CHECK(r.get_f64_array() == std::vector<double>{0.25, -0.5});
    CHECK(r.at_end());

    BlobReader truncated(std::span<const std::uint8_t>(bytes.data(), 2));
    CHECK_THROWS_AS(truncated.get_u32(), BundleFormatError);
}

TEST_CASE("crc32 known vector") {
    const std::string s = "123456789";
    CHECK(crc32(std::span<const std::uint8_t>(
              reinterpret_cast<const std::uint8_t*>(s.data()), s.size())) == 0xCBF43926u);
}

TEST_CASE("bundle: save, load, resave byte-identical; magic checked") {
    Bundle bundle;
    bundle.created_at = "1970-01-01T00:00:00Z";
    bundle.config_digest = "deadbeefdeadbeef";
    bundle.components.push_back({"alpha", {1, 2, 3, 4}});
    bundle.components.push_back({"beta", {9, 8}});

    const std::string path = "/tmp/reliance_test_bundle.rlnc";
    bundle.save(path);
    auto first = slurp(path);
    CHECK(first[0] == 'R');
    CHECK(first[1] == 'L');
    CHECK(first[2] == 'N');
    CHECK(first[3] == 'C');

    Bundle loaded = Bundle::load(path);
    CHECK(loaded.created_at == bundle.created_at);
    CHECK(loaded.config_digest == bundle.config_digest);
    REQUIRE(loaded.components.size() == 2);
    CHECK(loaded.components[0].payload == bundle.components[0].payload);
    CHECK(loaded.require("beta").payload == bundle.components[1].payload);
    CHECK(loaded.find("gamma") == nullptr);

    loaded.save(path);
    CHECK(slurp(path) == first);
    std::remove(path.c_str());
}

TEST_CASE("bundle: a flipped payload byte fails the checksum") {
    Bundle bundle;
    bundle.created_at = "t";
    bundle.config_digest = "d";
    bundle.components.push_back({"blob", std::vector<std::uint8_t>(64, 7)});
    const std::string path = "/tmp/reliance_test_corrupt.rlnc";
    bundle.save(path);

    auto bytes = slurp(path);
    bytes.back() ^= 0x01;
    std::ofstream(path, std::ios::binary).write(reinterpret_cast<char*>(bytes.data()),
                                                static_cast<std::streamsize>(bytes.size()));
    CHECK_THROWS_AS(Bundle::load(path), BundleFormatError);
    std::remove(path.c_str());
}

TEST_CASE("model payloads round-trip bit-exactly") {
    Rng rng(3);

    models::LogRegModel lr;
    lr.weights = {0.25, -1.75, 3.5};
    lr.bias = 0.125;
    CHECK(encode_logreg(decode_logreg(encode_logreg(lr))) == encode_logreg(lr));

    models::MnbModel mnb;
    mnb.log_theta = nn::Matrix(2, 3);
    for (double& v : mnb.log_theta.values()) v = rng.next_double(-3, 0);
    mnb.feat_min = {0.0, -1.0, 2.0};
    mnb.feat_max = {1.0, 1.0, 4.0};
    CHECK(encode_mnb(decode_mnb(encode_mnb(mnb))) == encode_mnb(mnb));

    models::SvmModel svm;
    svm.support_vectors = nn::Matrix(2, 3);
    for (double& v : svm.support_vectors.values()) v = rng.next_double(-1, 1);
    svm.coeffs = {1.0, -1.0};
    svm.sv_train_index = {0, 5};
    svm.gamma = 0.7;
    svm.bias = -0.1;
    svm.platt_a = -2.0;
    svm.platt_b = 0.1;
    CHECK(encode_svm(decode_svm(encode_svm(svm))) == encode_svm(svm));

    models::ForestModel forest;
    forest.trees.resize(2);
    forest.trees[0].nodes.push_back({0, 0.5, 1, 2, -1});
    forest.trees[0].nodes.push_back({-1, 0.0, -1, -1, 0});
    forest.trees[0].nodes.push_back({-1, 0.0, -1, -1, 1});
    forest.trees[1].nodes.push_back({-1, 0.0, -1, -1, 1});
    CHECK(encode_forest(decode_forest(encode_forest(forest))) == encode_forest(forest));

    auto net_model = models::BiLstmModel{};
    net_model.net = models::BiLstmNet::create(4, {3, 2}, 3, 77);
    net_model.config.widths = {3, 2};
    CHECK(encode_bilstm(decode_bilstm(encode_bilstm(net_model))) == encode_bilstm(net_model));

    nn::MlpModel mlp;
    mlp.config.hidden = {3};
    mlp.weights.emplace_back(3, 5);
    mlp.biases.emplace_back(1, 3);
    mlp.weights.emplace_back(2, 3);
    mlp.biases.emplace_back(1, 2);
    for (auto& wmat : mlp.weights)
        for (double& v : wmat.values()) v = rng.next_double(-1, 1);
    CHECK(encode_mlp(decode_mlp(encode_mlp(mlp))) == encode_mlp(mlp));

    corpus::StopwordList sw(std::vector<std::string>{"the", "a", "an"});
    auto decoded = decode_stopwords(encode_stopwords(sw));
    CHECK(decoded.size() == 3);
    CHECK(decoded.contains("the"));
    CHECK(decoded.checksum() == sw.checksum());
}

TEST_CASE("doc2vec payload round-trips and keeps scoring behaviour") {
    corpus::SyntheticSpec spec;
    spec.docs_per_topic = 10;
    auto docs = corpus::synthetic_corpus(spec, 3);
    embed::Doc2VecConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 3;
    cfg.seed = 4;
    auto model = embed::train_doc2vec(docs, cfg);

    auto decoded = decode_doc2vec(encode_doc2vec(model));
    CHECK(decoded.word_in == model.word_in);
    CHECK(decoded.doc_vecs == model.doc_vecs);
    CHECK(decoded.word_out == model.word_out);
    CHECK(decoded.vocab.size() == model.vocab.size());
    CHECK(decoded.doc_ids == model.doc_ids);

    auto a = embed::infer_vector(model, docs[0].tokens, 5, 11);
    auto b = embed::infer_vector(decoded, docs[0].tokens, 5, 11);
    CHECK(a == b);
}

TEST_CASE("stack bundle: reloaded model predicts bit-identically") {
    // small but fully real stack
    nn::Matrix x;
    std::vector<int> y;
    test_helpers::make_blobs(20, 4, 1.5, 0.6, 14, x, y);

    ensemble::StackingModel stack;
    stack.base.logreg = models::train_logreg(x, y, models::LogRegConfig{});
    stack.base.svm = models::train_svm_smo(x, y, models::SvmConfig{});
    models::ForestConfig fc;
    fc.trees = 10;
    stack.base.forest = models::train_forest(x, y, fc);
    stack.base.mnb = models::train_mnb_scaled(x, y, 1.0);
    {
        Rng rng(5);
        nn::Matrix words(6, 4);
        for (double& v : words.values()) v = rng.next_double(-0.5, 0.5);
        std::vector<std::vector<int>> rows(static_cast<std::size_t>(x.rows()));
        std::vector<nn::SeqView> seqs;
        for (int i = 0; i < x.rows(); ++i) {
            for (int t = 0; t < 5; ++t)
                rows[static_cast<std::size_t>(i)].push_back(
                    static_cast<int>(rng.next_below(6)));
            nn::SeqView v;
            for (int r : rows[static_cast<std::size_t>(i)]) v.push_back(words.row_span(r));
            seqs.push_back(std::move(v));
        }
        models::BiLstmConfig bc;
        bc.max_epochs = 1;
        stack.base.bilstm = models::train_bilstm(seqs, y, 4, bc);
    }
    {
        Rng rng(6);
        nn::Matrix meta(x.rows(), 5);
        for (double& v : meta.values()) v = rng.next_double();
        nn::MlpConfig mc;
        mc.epochs = 5;
        stack.meta = nn::mlp_train(meta, y, mc, 3);
    }

    corpus::SyntheticSpec spec;
    spec.docs_per_topic = 5;
    auto docs = corpus::synthetic_corpus(spec, 1);
    embed::Doc2VecConfig dcfg;
    dcfg.dim = 4;
    dcfg.epochs = 2;
    auto d2v = embed::train_doc2vec(docs, dcfg);
    corpus::StopwordList sw(std::vector<std::string>{"the"});

    Bundle bundle = make_stack_bundle(d2v, stack, sw, "digest", "1970-01-01T00:00:00Z");
    CHECK(bundle.extra.at("column_order") == "BiLSTM,LR,SVM,Random Forest,Naive Bayes");
    const std::string path = "/tmp/reliance_test_stack.rlnc";
    bundle.save(path);
    auto loaded = load_stack_bundle(Bundle::load(path));
    std::remove(path.c_str());

    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> features(4);
        for (double& v : features) v = rng.next_double(-1, 1);
        models::PredictInput input;
        input.features = features;
        auto a = ensemble::predict(stack, input);
        auto b = ensemble::predict(loaded.stack, input);
        CHECK(a.probability == b.probability);  // bitwise
        CHECK(a.label == b.label);
        CHECK(a.base_scores == b.base_scores);
    }
}

TEST_CASE("config: digest is whitespace-insensitive and sensitive to meaning") {
    const std::string compact = R"({"profile":"desk","seed":7})";
    const std::string spaced = "{\n  \"profile\": \"desk\",\n  \"seed\": 7\n}\n";
    auto a = RunConfig::from_json_text(compact);
    auto b = RunConfig::from_json_text(spaced);
    CHECK(a.digest() == b.digest());

    auto c = RunConfig::from_json_text(R"({"profile":"desk","seed":8})");
    CHECK(a.digest() != c.digest());

    auto d = RunConfig::from_json_text(R"({"profile":"desk","seed":7,"mnb":{"alpha":2.0}})");
    CHECK(a.digest() != d.digest());
}

TEST_CASE("config: unknown keys and bad profiles rejected") {
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"profil":"desk"})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"doc2vec":{"dims":99}})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"profile":"huge"})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text("not json"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"dataset":"/does/not/exist.csv"})"),
                    ConfigError);
}

TEST_CASE("config: profiles set their documented defaults") {
    auto desk = RunConfig::from_json_text(R"({"profile":"desk"})");
    CHECK(desk.experiment.doc2vec.dim == 100);
    CHECK(desk.experiment.doc2vec.epochs == 20);
    CHECK(desk.experiment.subsample == 1.0);  // synthetic corpus is not subsampled
    CHECK(desk.experiment.stack.base.svm.cache_bytes == (std::size_t(256) << 20));

    auto full = RunConfig::from_json_text(R"({"profile":"full"})");
    CHECK(full.experiment.doc2vec.dim == 1200);
    CHECK(full.experiment.doc2vec.epochs == 50);
    CHECK(full.experiment.split.train_fraction == 0.8);
    CHECK_THROWS_AS(
        RunConfig::from_json_text(R"({"profile":"full","doc2vec":{"dim":64}})"),
        ConfigError);

    auto custom = RunConfig::from_json_text(R"({"profile":"custom","doc2vec":{"dim":64}})");
    CHECK(custom.experiment.doc2vec.dim == 64);
}
