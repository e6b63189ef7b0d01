#include "edos/experiment.hpp"

#include <stdexcept>

namespace edos {

bool experiment_is_dual(int id) { return id >= 5 && id <= 8; }
bool experiment_requires_dapt(int id) { return id == 6 || id == 8; }
bool experiment_forces_joint(int id) { return id == 7; }

void ExperimentConfig::validate() const {
    if (experiment_id < 1 || experiment_id > 8)
        throw std::invalid_argument("experiment id must be 1..8");
    if (experiment_forces_joint(experiment_id) != (task == TaskSelect::B_joint))
        throw std::invalid_argument(
            "experiment 7 is joint learning for task B and the only experiment that uses it");
    encoder_a.validate();
    if (experiment_is_dual(experiment_id) != encoder_b.has_value())
        throw std::invalid_argument(experiment_is_dual(experiment_id)
                                        ? "dual experiment needs encoder_b"
                                        : "single-encoder experiment forbids encoder_b");
    if (encoder_b) encoder_b->validate();
    head.validate();
    if (head.num_classes != num_classes_for(task))
        throw std::invalid_argument("head num_classes does not match task");
    if (is_dual(head.variant) != encoder_b.has_value())
        throw std::invalid_argument("head variant does not match encoder count");
    train.validate();
    if (train.task != task) throw std::invalid_argument("train task does not match experiment task");
}

ExperimentConfig make_experiment_config(int id, TaskSelect task, std::size_t vocab_size) {
    if (id < 1 || id > 8) throw std::invalid_argument("experiment id must be 1..8");
    if (experiment_forces_joint(id)) {
        if (task != TaskSelect::B && task != TaskSelect::B_joint)
            throw std::invalid_argument("experiment 7 is joint learning for task B");
        task = TaskSelect::B_joint;
    } else if (task == TaskSelect::B_joint) {
        throw std::invalid_argument("only experiment 7 trains the joint task B variant");
    }

    ExperimentConfig c;
    c.experiment_id = id;
    c.task = task;
    switch (id) {
        case 1:
            c.encoder_a = EncoderConfig::toy(vocab_size, AttentionKind::absolute);
            c.head.variant = HeadVariant::LastLayerMLP;
            break;
        case 2:
            c.encoder_a = EncoderConfig::toy(vocab_size, AttentionKind::disentangled);
            c.head.variant = HeadVariant::LastLayerMLP;
            break;
        case 3:
            c.encoder_a = EncoderConfig::toy(vocab_size, AttentionKind::absolute);
            c.head.variant = HeadVariant::AvgLayersMLP;
            break;
        case 4:
            c.encoder_a = EncoderConfig::toy(vocab_size, AttentionKind::disentangled);
            c.head.variant = HeadVariant::AvgLayersMLP;
            break;
        case 5:
        case 6:
        case 7:
            c.encoder_a = EncoderConfig::toy(vocab_size, AttentionKind::absolute);
            c.encoder_b = EncoderConfig::toy(vocab_size, AttentionKind::disentangled);
            c.head.variant = HeadVariant::DualMLPConcatMLP;
            break;
        case 8:
            c.encoder_a = EncoderConfig::toy(vocab_size, AttentionKind::absolute);
            c.encoder_b = EncoderConfig::toy(vocab_size, AttentionKind::disentangled);
            c.head.variant = HeadVariant::DualConcatMLP;
            break;
    }
    c.head.num_classes = num_classes_for(task);
    c.train.task = task;
    if (experiment_requires_dapt(id)) c.train.init = InitKind::from_dapt_checkpoint;
    return c;
}

nlohmann::json encoder_to_json(const EncoderConfig& c) {
    return {
        {"n_layers", c.n_layers},
        {"n_heads", c.n_heads},
        {"d_model", c.d_model},
        {"d_ff", c.d_ff},
        {"vocab_size", c.vocab_size},
        {"max_len", c.max_len},
        {"attention_kind", attention_kind_name(c.attention_kind)},
        {"relative_clip", c.relative_clip},
        {"dropout", c.dropout},
    };
}

EncoderConfig encoder_from_json(const nlohmann::json& j) {
    EncoderConfig c;
    c.n_layers = j.at("n_layers").get<std::size_t>();
    c.n_heads = j.at("n_heads").get<std::size_t>();
    c.d_model = j.at("d_model").get<std::size_t>();
    c.d_ff = j.at("d_ff").get<std::size_t>();
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.max_len = j.at("max_len").get<std::size_t>();
    c.attention_kind = attention_kind_from_name(j.at("attention_kind").get<std::string>());
    c.relative_clip = j.at("relative_clip").get<std::size_t>();
    c.dropout = j.at("dropout").get<double>();
    return c;
}

nlohmann::json head_to_json(const HeadConfig& c) {
    return {
        {"variant", head_variant_name(c.variant)},
        {"branch_hidden", c.branch_hidden},
        {"trunk_hidden", c.trunk_hidden},
        {"num_classes", c.num_classes},
        {"dropout", c.dropout},
        {"mean_pool", c.mean_pool},
    };
}

HeadConfig head_from_json(const nlohmann::json& j) {
    HeadConfig c;
    c.variant = head_variant_from_name(j.at("variant").get<std::string>());
    c.branch_hidden = j.at("branch_hidden").get<std::vector<std::size_t>>();
    c.trunk_hidden = j.at("trunk_hidden").get<std::vector<std::size_t>>();
    c.num_classes = j.at("num_classes").get<std::size_t>();
    c.dropout = j.at("dropout").get<double>();
    c.mean_pool = j.at("mean_pool").get<bool>();
    return c;
}

nlohmann::json train_to_json(const TrainConfig& c) {
    return {
        {"epochs", c.epochs},
        {"learning_rate", c.learning_rate},
        {"beta1", c.optimizer.beta1},
        {"beta2", c.optimizer.beta2},
        {"eps", c.optimizer.eps},
        {"weight_decay", c.optimizer.weight_decay},
        {"batch_size", c.batch_size},
        {"seed", c.seed},
        {"task", std::string(task_select_name(c.task))},
        {"init", c.init == InitKind::from_dapt_checkpoint ? "from_dapt_checkpoint" : "random"},
        {"freeze_encoders", c.freeze_encoders},
        {"class_weights", c.class_weights},
    };
}

TrainConfig train_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.epochs = j.at("epochs").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.optimizer.learning_rate = c.learning_rate;
    c.optimizer.beta1 = j.at("beta1").get<double>();
    c.optimizer.beta2 = j.at("beta2").get<double>();
    c.optimizer.eps = j.at("eps").get<double>();
    c.optimizer.weight_decay = j.at("weight_decay").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.task = task_select_from_name(j.at("task").get<std::string>());
    c.init = j.at("init").get<std::string>() == "from_dapt_checkpoint"
                 ? InitKind::from_dapt_checkpoint
                 : InitKind::random;
    c.freeze_encoders = j.at("freeze_encoders").get<bool>();
    c.class_weights = j.at("class_weights").get<bool>();
    return c;
}

nlohmann::json experiment_to_json(const ExperimentConfig& c) {
    nlohmann::json j = {
        {"experiment_id", c.experiment_id},
        {"task", std::string(task_select_name(c.task))},
        {"encoder_a", encoder_to_json(c.encoder_a)},
        {"head", head_to_json(c.head)},
        {"train", train_to_json(c.train)},
    };
    if (c.encoder_b) j["encoder_b"] = encoder_to_json(*c.encoder_b);
    return j;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.experiment_id = j.at("experiment_id").get<int>();
    c.task = task_select_from_name(j.at("task").get<std::string>());
    c.encoder_a = encoder_from_json(j.at("encoder_a"));
    if (j.contains("encoder_b")) c.encoder_b = encoder_from_json(j.at("encoder_b"));
    c.head = head_from_json(j.at("head"));
    c.train = train_from_json(j.at("train"));
    return c;
}

namespace {

void merge_encoder(EncoderConfig& c, const nlohmann::json& j) {
    if (j.contains("n_layers")) c.n_layers = j.at("n_layers").get<std::size_t>();
    if (j.contains("n_heads")) c.n_heads = j.at("n_heads").get<std::size_t>();
    if (j.contains("d_model")) c.d_model = j.at("d_model").get<std::size_t>();
    if (j.contains("d_ff")) c.d_ff = j.at("d_ff").get<std::size_t>();
    if (j.contains("max_len")) c.max_len = j.at("max_len").get<std::size_t>();
    if (j.contains("relative_clip")) c.relative_clip = j.at("relative_clip").get<std::size_t>();
    if (j.contains("dropout")) c.dropout = j.at("dropout").get<double>();
    if (j.contains("attention_kind"))
        c.attention_kind = attention_kind_from_name(j.at("attention_kind").get<std::string>());
}

} // namespace

void apply_config_overrides(ExperimentConfig& config, const nlohmann::json& file) {
    if (file.contains("encoder")) {
        merge_encoder(config.encoder_a, file.at("encoder"));
        if (config.encoder_b) merge_encoder(*config.encoder_b, file.at("encoder"));
    }
    if (file.contains("encoder_a")) merge_encoder(config.encoder_a, file.at("encoder_a"));
    if (file.contains("encoder_b")) {
        if (!config.encoder_b)
            throw std::invalid_argument("config overrides encoder_b of a single-encoder experiment");
        merge_encoder(*config.encoder_b, file.at("encoder_b"));
    }
    if (file.contains("head")) {
        const auto& h = file.at("head");
        if (h.contains("branch_hidden"))
            config.head.branch_hidden = h.at("branch_hidden").get<std::vector<std::size_t>>();
        if (h.contains("trunk_hidden"))
            config.head.trunk_hidden = h.at("trunk_hidden").get<std::vector<std::size_t>>();
        if (h.contains("dropout")) config.head.dropout = h.at("dropout").get<double>();
        if (h.contains("mean_pool")) config.head.mean_pool = h.at("mean_pool").get<bool>();
    }
    if (file.contains("train")) {
        const auto& t = file.at("train");
        if (t.contains("epochs")) config.train.epochs = t.at("epochs").get<int>();
        if (t.contains("learning_rate")) {
            config.train.learning_rate = t.at("learning_rate").get<double>();
            config.train.optimizer.learning_rate = config.train.learning_rate;
        }
        if (t.contains("beta1")) config.train.optimizer.beta1 = t.at("beta1").get<double>();
        if (t.contains("beta2")) config.train.optimizer.beta2 = t.at("beta2").get<double>();
        if (t.contains("eps")) config.train.optimizer.eps = t.at("eps").get<double>();
        if (t.contains("weight_decay"))
            config.train.optimizer.weight_decay = t.at("weight_decay").get<double>();
        if (t.contains("batch_size")) config.train.batch_size = t.at("batch_size").get<std::size_t>();
        if (t.contains("freeze_encoders"))
            config.train.freeze_encoders = t.at("freeze_encoders").get<bool>();
        if (t.contains("class_weights"))
            config.train.class_weights = t.at("class_weights").get<bool>();
    }
}

ModelBundle<float> make_bundle_from_config(const ExperimentConfig& config, std::uint64_t seed) {
    config.validate();
    return make_bundle<float>(config.task, config.head, config.encoder_a, config.encoder_b, seed);
}

nlohmann::json classifier_info(const ExperimentConfig& config, std::uint64_t seed) {
    return {{"model_type", "classifier"}, {"config", experiment_to_json(config)}, {"seed", seed}};
}

nlohmann::json mlm_info(const EncoderConfig& config, std::uint64_t seed) {
    return {{"model_type", "mlm"}, {"encoder", encoder_to_json(config)}, {"seed", seed}};
}

LoadedBundle bundle_from_checkpoint(const LoadedCheckpoint& ckpt) {
    const auto& info = ckpt.meta.at("experiment");
    if (info.at("model_type").get<std::string>() != "classifier")
        throw std::runtime_error("checkpoint does not hold a classifier model");
    LoadedBundle out;
    out.config = experiment_from_json(info.at("config"));
    out.seed = info.at("seed").get<std::uint64_t>();
    out.vocab = ckpt.vocab;
    out.bundle = make_bundle_from_config(out.config, out.seed);
    restore_store(*out.bundle.store, ckpt);
    return out;
}

void init_encoder_from_dapt(ModelBundle<float>& bundle, const LoadedCheckpoint& ckpt) {
    const auto& info = ckpt.meta.at("experiment");
    if (info.at("model_type").get<std::string>() != "mlm")
        throw std::runtime_error("init checkpoint is not a masked-LM pretraining checkpoint");
    const EncoderConfig dapt_config = encoder_from_json(info.at("encoder"));

    std::string prefix;
    const EncoderConfig* target = nullptr;
    if (bundle.encoder_a.config.attention_kind == dapt_config.attention_kind) {
        prefix = "enc_a.";
        target = &bundle.encoder_a.config;
    } else if (bundle.encoder_b &&
               bundle.encoder_b->config.attention_kind == dapt_config.attention_kind) {
        prefix = "enc_b.";
        target = &bundle.encoder_b->config;
    } else {
        throw std::runtime_error(std::string("no bundle encoder with attention kind ") +
                                 attention_kind_name(dapt_config.attention_kind));
    }
    if (target->n_layers != dapt_config.n_layers || target->n_heads != dapt_config.n_heads ||
        target->d_model != dapt_config.d_model || target->d_ff != dapt_config.d_ff ||
        target->vocab_size != dapt_config.vocab_size || target->max_len != dapt_config.max_len ||
        target->relative_clip != dapt_config.relative_clip)
        throw std::runtime_error("pretraining checkpoint encoder shape does not match experiment");

    std::size_t copied = 0;
    for (auto& [name, var] : *bundle.store) {
        if (name.rfind(prefix, 0) != 0) continue;
        const std::string source = "enc." + name.substr(prefix.size());
        const Tensor<float>* t = ckpt.find(source);
        if (!t) throw std::runtime_error("pretraining checkpoint is missing tensor " + source);
        if (!t->same_shape(var.value()))
            throw std::runtime_error("pretraining checkpoint shape mismatch for " + source);
        var.value() = *t;
        ++copied;
    }
    if (copied == 0) throw std::runtime_error("no encoder tensors copied from pretraining checkpoint");
}

} // namespace edos
