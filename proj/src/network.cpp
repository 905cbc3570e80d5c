#include "cbott/network.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <numeric>

namespace cbott {

namespace {

constexpr Scalar kProbFloor = 1e-12;

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, Scalar bound, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = bound * (2.0 * rng.uniform() - 1.0);
  return m;
}

void check_ids(const ModelParams& model, const TrainingWindow& window) {
  if (static_cast<int>(window.context.size()) != model.context_len())
    throw DataError("window context length " + std::to_string(window.context.size()) +
                    " does not match model window size " + std::to_string(model.window_size));
  for (TokenId id : window.context)
    if (id < 0 || id >= model.vocab_size)
      throw DataError("context token id out of range: " + std::to_string(id));
  if (window.target_term < 0 || window.target_term >= model.vocab_size)
    throw DataError("target term id out of range: " + std::to_string(window.target_term));
  if (window.target_hour < 0 || window.target_hour >= kHourClasses)
    throw DataError("target hour out of range: " + std::to_string(window.target_hour));
}

}  // namespace

bool ModelParams::shapes_consistent() const {
  return embeddings.rows() == vocab_size && embeddings.cols() == embedding_dim &&
         hidden_weight.rows() == hidden_dim && hidden_weight.cols() == feature_dim() &&
         hidden_bias.size() == hidden_dim && term_weight.rows() == vocab_size &&
         term_weight.cols() == hidden_dim && term_bias.size() == vocab_size &&
         hour_weight.rows() == kHourClasses && hour_weight.cols() == hidden_dim &&
         hour_bias.size() == kHourClasses;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw DataError("model.epochs must be >= 1");
  if (patience < 1) throw DataError("model.patience must be >= 1");
  if (min_delta < 0) throw DataError("model.min_delta must be >= 0");
  if (!(learning_rate > 0)) throw DataError("model.learning_rate must be > 0");
  if (batch_size < 1) throw DataError("model.batch_size must be >= 1");
  if (hidden_dim < 1) throw DataError("model.hidden_dim must be >= 1");
  if (embedding_dim < 1) throw DataError("model.embedding_dim must be >= 1");
}

ModelParams init_model(TokenId vocab_size, int embedding_dim, int hidden_dim,
                       int window_size, std::uint64_t seed) {
  if (vocab_size < 1 || embedding_dim < 1 || hidden_dim < 1)
    throw DataError("model dimensions must be >= 1");
  if (window_size < 3 || window_size % 2 == 0)
    throw DataError("window size must be odd and >= 3");

  ModelParams model;
  model.vocab_size = vocab_size;
  model.embedding_dim = embedding_dim;
  model.hidden_dim = hidden_dim;
  model.window_size = window_size;

  Rng rng(seed);
  const int feature_dim = (window_size - 1) * embedding_dim;
  model.embeddings = uniform_matrix(vocab_size, embedding_dim, 1.0 / std::sqrt(embedding_dim), rng);
  model.hidden_weight = uniform_matrix(hidden_dim, feature_dim, 1.0 / std::sqrt(feature_dim), rng);
  model.hidden_bias = Vector::Zero(hidden_dim);
  model.term_weight = uniform_matrix(vocab_size, hidden_dim, 1.0 / std::sqrt(hidden_dim), rng);
  model.term_bias = Vector::Zero(vocab_size);
  model.hour_weight = uniform_matrix(kHourClasses, hidden_dim, 1.0 / std::sqrt(hidden_dim), rng);
  model.hour_bias = Vector::Zero(kHourClasses);
  return model;
}

ForwardOutput forward(const ModelParams& model, const TrainingWindow& window) {
  check_ids(model, window);

  ForwardOutput out;
  const int d = model.embedding_dim;
  out.features.resize(model.feature_dim());
  for (int slot = 0; slot < model.context_len(); ++slot)
    out.features.segment(slot * d, d) = model.embeddings.row(window.context[static_cast<std::size_t>(slot)]).transpose();

  out.hidden_pre = model.hidden_weight * out.features + model.hidden_bias;
  out.hidden = relu(out.hidden_pre);
  out.term_probs = softmax_columns(model.term_weight * out.hidden + model.term_bias);
  out.hour_probs = softmax_columns(model.hour_weight * out.hidden + model.hour_bias);
  return out;
}

Scalar loss(const ForwardOutput& output, TokenId target_term, int target_hour) {
  const Scalar pt = std::max(output.term_probs(target_term), kProbFloor);
  const Scalar ph = std::max(output.hour_probs(target_hour), kProbFloor);
  return -std::log(pt) - std::log(ph);
}

Scalar compute_gradients(const ModelParams& model,
                         std::span<const TrainingWindow> batch, Gradients& grads) {
  if (batch.empty()) throw DataError("empty training batch");
  for (const auto& window : batch) check_ids(model, window);

  const Eigen::Index B = static_cast<Eigen::Index>(batch.size());
  const int d = model.embedding_dim;
  const int slots = model.context_len();

  // Forward, columns = windows.
  Matrix features(model.feature_dim(), B);
  for (Eigen::Index b = 0; b < B; ++b)
    for (int slot = 0; slot < slots; ++slot)
      features.col(b).segment(slot * d, d) =
          model.embeddings.row(batch[static_cast<std::size_t>(b)].context[static_cast<std::size_t>(slot)]).transpose();

  Matrix hidden_pre = (model.hidden_weight * features).colwise() + model.hidden_bias;
  Matrix hidden = relu(hidden_pre);
  Matrix term_probs = softmax_columns((model.term_weight * hidden).colwise() + model.term_bias);
  Matrix hour_probs = softmax_columns((model.hour_weight * hidden).colwise() + model.hour_bias);

  Scalar total_loss = 0;
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto& window = batch[static_cast<std::size_t>(b)];
    total_loss -= std::log(std::max(term_probs(window.target_term, b), kProbFloor));
    total_loss -= std::log(std::max(hour_probs(window.target_hour, b), kProbFloor));
  }
  const Scalar mean_loss = total_loss / static_cast<Scalar>(B);

  // Backward pass on the mean batch loss.
  const Scalar inv_b = Scalar(1) / static_cast<Scalar>(B);
  Matrix dterm = term_probs;
  Matrix dhour = hour_probs;
  for (Eigen::Index b = 0; b < B; ++b) {
    dterm(batch[static_cast<std::size_t>(b)].target_term, b) -= 1;
    dhour(batch[static_cast<std::size_t>(b)].target_hour, b) -= 1;
  }
  dterm *= inv_b;
  dhour *= inv_b;

  grads.term_weight.noalias() = dterm * hidden.transpose();
  grads.term_bias = dterm.rowwise().sum();
  grads.hour_weight.noalias() = dhour * hidden.transpose();
  grads.hour_bias = dhour.rowwise().sum();

  Matrix dhidden = model.term_weight.transpose() * dterm +
                   model.hour_weight.transpose() * dhour;
  Matrix dpre = ((hidden_pre.array() > 0).cast<Scalar>() * dhidden.array()).matrix();

  grads.hidden_weight.noalias() = dpre * features.transpose();
  grads.hidden_bias = dpre.rowwise().sum();

  Matrix dfeatures = model.hidden_weight.transpose() * dpre;
  grads.embeddings = Matrix::Zero(model.vocab_size, d);
  for (Eigen::Index b = 0; b < B; ++b)
    for (int slot = 0; slot < slots; ++slot)
      grads.embeddings.row(batch[static_cast<std::size_t>(b)].context[static_cast<std::size_t>(slot)]) +=
          dfeatures.col(b).segment(slot * d, d).transpose();

  return mean_loss;
}

Scalar train_step(ModelParams& model, std::span<const TrainingWindow> batch,
                  double learning_rate) {
  Gradients grads;
  const Scalar mean_loss = compute_gradients(model, batch, grads);
  if (!std::isfinite(mean_loss))
    throw std::runtime_error("non-finite training loss (batch of " +
                             std::to_string(batch.size()) + " windows, V=" +
                             std::to_string(model.vocab_size) + ")");

  const Scalar lr = static_cast<Scalar>(learning_rate);
  model.embeddings -= lr * grads.embeddings;
  model.hidden_weight -= lr * grads.hidden_weight;
  model.hidden_bias -= lr * grads.hidden_bias;
  model.term_weight -= lr * grads.term_weight;
  model.term_bias -= lr * grads.term_bias;
  model.hour_weight -= lr * grads.hour_weight;
  model.hour_bias -= lr * grads.hour_bias;
  return mean_loss;
}

TrainHistory train(ModelParams& model, const HostDataset& dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.windows.empty()) throw DataError("cannot train on an empty dataset");

  std::vector<std::size_t> order(dataset.windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(mix_seed(config.seed, 0x73687566ULL));  // epoch shuffle stream

  TrainHistory history;
  EarlyStopper stopper(config.min_delta, config.patience);

  std::vector<TrainingWindow> batch;
  batch.reserve(static_cast<std::size_t>(config.batch_size));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);

    Scalar loss_sum = 0;
    std::size_t window_count = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      batch.clear();
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      for (std::size_t i = start; i < stop; ++i) batch.push_back(dataset.windows[order[i]]);
      const Scalar mean_loss = train_step(model, batch, config.learning_rate);
      loss_sum += mean_loss * static_cast<Scalar>(batch.size());
      window_count += batch.size();
    }

    const Scalar epoch_loss = loss_sum / static_cast<Scalar>(window_count);
    history.epoch_losses.push_back(epoch_loss);
    history.epochs_run = epoch + 1;

    if (stopper.update(epoch_loss)) {
      history.stopped_early = true;
      break;
    }
  }
  return history;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<Scalar>();
  return m;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const nlohmann::json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<Scalar>();
  return v;
}

}  // namespace

void save_model(const ModelParams& model, const std::string& path) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["vocab_size"] = model.vocab_size;
  j["embedding_dim"] = model.embedding_dim;
  j["hidden_dim"] = model.hidden_dim;
  j["window_size"] = model.window_size;
  j["hour_classes"] = kHourClasses;
  j["vocab_hash"] = model.vocab_hash;
  j["embeddings"] = matrix_to_json(model.embeddings);
  j["hidden_weight"] = matrix_to_json(model.hidden_weight);
  j["hidden_bias"] = vector_to_json(model.hidden_bias);
  j["term_weight"] = matrix_to_json(model.term_weight);
  j["term_bias"] = vector_to_json(model.term_bias);
  j["hour_weight"] = matrix_to_json(model.hour_weight);
  j["hour_bias"] = vector_to_json(model.hour_bias);

  std::ofstream out(path);
  if (!out) throw DataError("cannot write model checkpoint '" + path + "'");
  out << j.dump() << '\n';
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read model checkpoint '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("model checkpoint is not valid JSON: " + path);
  if (j.value("format_version", -1) != 1)
    throw DataError("unsupported checkpoint format version in " + path);
  if (j.value("hour_classes", 0) != kHourClasses)
    throw DataError("checkpoint hour class count mismatch in " + path);

  ModelParams model;
  model.vocab_size = j.at("vocab_size").get<TokenId>();
  model.embedding_dim = j.at("embedding_dim").get<int>();
  model.hidden_dim = j.at("hidden_dim").get<int>();
  model.window_size = j.at("window_size").get<int>();
  model.vocab_hash = j.at("vocab_hash").get<std::uint64_t>();
  model.embeddings = matrix_from_json(j.at("embeddings"));
  model.hidden_weight = matrix_from_json(j.at("hidden_weight"));
  model.hidden_bias = vector_from_json(j.at("hidden_bias"));
  model.term_weight = matrix_from_json(j.at("term_weight"));
  model.term_bias = vector_from_json(j.at("term_bias"));
  model.hour_weight = matrix_from_json(j.at("hour_weight"));
  model.hour_bias = vector_from_json(j.at("hour_bias"));
  if (!model.shapes_consistent())
    throw DataError("model checkpoint has inconsistent shapes: " + path);
  return model;
}

}  // namespace cbott
