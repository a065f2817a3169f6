/*
 * Copyright 2026 The MWE Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "commands.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mwe/config_io.h"
#include "mwe/corpus.h"
#include "mwe/embedding.h"
#include "mwe/errors.h"
#include "mwe/eval.h"
#include "mwe/features.h"
#include "mwe/joint.h"
#include "mwe/sgns.h"
#include "mwe/wav.h"
#include "run_config.h"

namespace mwe::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Flag values; unset flags leave the config file (or default) in place.
struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::map<std::string, std::string> paths;
  std::optional<double> lambda_tag, lambda_artist, lambda_track;
  std::optional<std::string> source;
  std::optional<std::size_t> k;
  // query
  std::vector<std::string> words;
  std::size_t top_k = 10;
  std::string kinds;
};

void AddPathFlag(CLI::App* app, Flags& f, const std::string& flag, const std::string& key,
                 const std::string& help) {
  app->add_option_function<std::string>(
      "--" + flag, [&f, key](const std::string& v) { f.paths[key] = v; }, help);
}

void AddCommonFlags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "Run configuration (JSON)");
  app->add_option_function<std::uint64_t>(
      "--seed", [&f](const std::uint64_t& v) { f.seed = v; }, "Global seed");
  app->add_option_function<int>(
      "--workers", [&f](const int& v) { f.workers = v; }, "Worker threads");
  app->add_option_function<std::string>(
      "--out", [&f](const std::string& v) { f.out = v; }, "Output directory");
  AddPathFlag(app, f, "general-corpus", "general_corpus", "General text corpus");
  AddPathFlag(app, f, "music-corpus", "music_corpus", "Music corpus (JSON Lines)");
  AddPathFlag(app, f, "corpus-dir", "corpus_dir", "Directory written by build-corpus");
  AddPathFlag(app, f, "embedding", "embedding", "Word embedding file");
  AddPathFlag(app, f, "features", "features", "Clip feature file (JSON Lines)");
  AddPathFlag(app, f, "supervision", "supervision", "Supervision file (JSON Lines)");
  AddPathFlag(app, f, "annotations", "annotations", "Evaluation annotations");
  AddPathFlag(app, f, "tag-metadata", "tag_metadata", "Tag metadata (TSV)");
  AddPathFlag(app, f, "checkpoint", "checkpoint", "Joint model checkpoint");
  AddPathFlag(app, f, "audio-list", "audio_list", "Audio list (TSV clip, track, wav)");
}

RunConfig ResolveConfig(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : LoadRunConfig(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.workers) c.workers = *f.workers;
  if (f.out) c.out = *f.out;
  std::map<std::string, std::string*> slots = {
      {"general_corpus", &c.paths.general_corpus}, {"music_corpus", &c.paths.music_corpus},
      {"corpus_dir", &c.paths.corpus_dir},         {"embedding", &c.paths.embedding},
      {"features", &c.paths.features},             {"supervision", &c.paths.supervision},
      {"annotations", &c.paths.annotations},       {"tag_metadata", &c.paths.tag_metadata},
      {"checkpoint", &c.paths.checkpoint},         {"audio_list", &c.paths.audio_list}};
  for (const auto& [key, value] : f.paths) *slots.at(key) = value;
  if (f.lambda_tag) c.joint.lambda_tag = *f.lambda_tag;
  if (f.lambda_artist) c.joint.lambda_artist = *f.lambda_artist;
  if (f.lambda_track) c.joint.lambda_track = *f.lambda_track;
  if (f.source) c.eval.source = *f.source;
  if (f.k) c.eval.k = *f.k;
  if (c.eval.source != "word" && c.eval.source != "joint") {
    throw InvalidArgument("--source must be 'word' or 'joint'");
  }
  if (c.eval.k < 1) throw InvalidArgument("-k must be >= 1");
  c.Propagate();
  c.joint.Validate();
  c.sgns.Validate();
  return c;
}

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t FileChecksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

json Inputs(const std::vector<fs::path>& paths) {
  json j = json::array();
  for (const auto& p : paths) {
    j.push_back({{"path", p.string()},
                 {"fnv1a64", Hex(FileChecksum(p))},
                 {"bytes", fs::file_size(p)}});
  }
  return j;
}

fs::path PrepareOut(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec || !fs::is_directory(c.out)) {
    throw IoError("cannot create output directory " + c.out);
  }
  return c.out;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void WriteJson(const fs::path& path, const json& j) { WriteText(path, j.dump(2) + "\n"); }

json Manifest(std::string_view command, const RunConfig& c, const std::vector<fs::path>& inputs) {
  return {{"command", command},
          {"seed", c.seed},
          {"config", c.ToJson()},
          {"inputs", Inputs(inputs)}};
}

std::string JoinTokens(std::span<const TokenId> ids, const Vocabulary& vocab) {
  std::string line;
  for (TokenId id : ids) {
    if (!line.empty()) line += ' ';
    line += vocab.token(id);
  }
  return line;
}

std::vector<std::vector<TokenId>> EncodeDocs(
    const std::vector<std::vector<std::string>>& docs, const Vocabulary& vocab) {
  std::vector<std::vector<TokenId>> out;
  for (const auto& d : docs) {
    auto ids = EncodeTokens(d, vocab);
    if (!ids.empty()) out.push_back(std::move(ids));
  }
  return out;
}

std::uint64_t CorpusSeed(const RunConfig& c) { return DeriveSeed(c.seed, "corpus"); }

// ---------------------------------------------------------------- build-corpus

int BuildCorpus(const RunConfig& c, std::ostream& out) {
  const fs::path music_path = RequireFile(c.paths.music_corpus, "paths.music_corpus");
  std::vector<fs::path> inputs = {music_path};
  std::vector<std::vector<std::string>> general;
  if (!c.paths.general_corpus.empty()) {
    inputs.push_back(RequireFile(c.paths.general_corpus, "paths.general_corpus"));
    general = ReadGeneralCorpus(inputs.back());
  }
  const std::vector<MusicDocument> music = ReadMusicCorpus(music_path);
  const Vocabulary vocab = BuildVocabulary(general, music, c.corpus);
  const fs::path dir = PrepareOut(c);

  vocab.SaveTsv(dir / "vocab.tsv");
  const auto general_ids = EncodeDocs(general, vocab);
  std::string text;
  for (const auto& ids : general_ids) text += JoinTokens(ids, vocab) + "\n";
  WriteText(dir / "general.txt", text);
  WriteMusicCorpus(dir / "music.jsonl", music);

  const TrainingCorpus corpus(vocab, c.corpus, general_ids, music, CorpusSeed(c));
  text.clear();
  for (std::size_t i = 0; i < music.size(); ++i) {
    text += JoinTokens(corpus.Paragraph(i, 0), vocab) + "\n";
  }
  WriteText(dir / "paragraphs.txt", text);

  std::int64_t general_tokens = 0, review_tokens = 0, tag_tokens = 0;
  for (const auto& d : general) general_tokens += static_cast<std::int64_t>(d.size());
  for (const auto& m : music) {
    for (const auto& s : m.review_sentences) review_tokens += static_cast<std::int64_t>(s.size());
    tag_tokens += static_cast<std::int64_t>(m.tags.size());
  }
  json by_kind = json::object();
  for (const auto& e : vocab.entries()) by_kind[std::string(TokenKindName(e.kind))] = 0;
  for (const auto& e : vocab.entries()) {
    by_kind[std::string(TokenKindName(e.kind))] =
        by_kind[std::string(TokenKindName(e.kind))].get<std::int64_t>() + 1;
  }
  json manifest = Manifest("build-corpus", c, inputs);
  manifest["corpus_seed"] = CorpusSeed(c);
  manifest["counts"] = {{"general_documents", general.size()},
                        {"music_documents", music.size()},
                        {"general_tokens", general_tokens},
                        {"review_tokens", review_tokens},
                        {"tag_tokens", tag_tokens},
                        {"artist_tokens", music.size()},
                        {"track_tokens", music.size()},
                        {"vocab_size", vocab.size()},
                        {"vocab_total_count", vocab.total_count()},
                        {"vocab_by_kind", by_kind}};
  WriteJson(dir / "manifest.json", manifest);
  out << "vocabulary: " << vocab.size() << " tokens, " << music.size()
      << " music documents, " << general_ids.size() << " general documents\n";
  return 0;
}

// ------------------------------------------------------------------ train-word

int TrainWord(const RunConfig& c, std::ostream& out) {
  const fs::path dir = RequireDirectory(c.paths.corpus_dir, "paths.corpus_dir");
  const std::vector<fs::path> inputs = {
      RequireFile((dir / "vocab.tsv").string(), "corpus vocabulary"),
      RequireFile((dir / "general.txt").string(), "corpus general text"),
      RequireFile((dir / "music.jsonl").string(), "corpus music documents"),
      RequireFile((dir / "paragraphs.txt").string(), "corpus paragraphs")};
  const Vocabulary vocab = Vocabulary::LoadTsv(inputs[0]);
  auto general = EncodeDocs(ReadGeneralCorpus(inputs[1]), vocab);
  auto music = ReadMusicCorpus(inputs[2]);

  TrainingCorpus corpus(vocab, c.corpus, std::move(general), std::move(music), CorpusSeed(c),
                        static_cast<std::size_t>(c.workers));
  if (c.corpus.shuffle_mode == ShuffleMode::kStatic) {
    auto paragraphs = EncodeDocs(ReadGeneralCorpus(inputs[3]), vocab);
    if (paragraphs.size() != corpus.num_music()) {
      throw InvalidArgument("corpus paragraphs.txt has " + std::to_string(paragraphs.size()) +
                            " paragraphs for " + std::to_string(corpus.num_music()) +
                            " music documents");
    }
    corpus.SetStaticParagraphs(std::move(paragraphs));
  }
  const NegativeSampler sampler(vocab, c.sgns.ns_exponent);
  std::string loss_log = "epoch\tloss\n";
  const SgnsResult result =
      TrainSgns(corpus, vocab.size(), sampler, c.sgns, [&](int epoch, double loss) {
        char line[64];
        std::snprintf(line, sizeof line, "%d\t%.9g\n", epoch + 1, loss);
        loss_log += line;
        out << "epoch " << epoch + 1 << " loss " << loss << "\n";
      });
  const fs::path out_dir = PrepareOut(c);
  const WordEmbedding emb = WordEmbedding::FromModel(vocab, result.model);
  SaveEmbedding(emb, out_dir / "embedding.txt");
  WriteText(out_dir / "loss.tsv", loss_log);

  json manifest = Manifest("train-word", c, inputs);
  manifest["hyperparameters"] = {{"dim", c.sgns.dim},
                                 {"window", c.corpus.window_size},
                                 {"epochs", c.sgns.epochs},
                                 {"negatives", c.sgns.negatives}};
  manifest["sgns_seed"] = c.sgns.seed;
  manifest["total_pairs"] = result.total_pairs;
  manifest["epoch_loss"] = result.epoch_loss;
  manifest["embedding_checksum"] = Hex(emb.Checksum());
  WriteJson(out_dir / "manifest.json", manifest);
  return 0;
}

// ----------------------------------------------------------------- train-joint

int TrainJointCommand(const RunConfig& c, std::ostream& out) {
  const std::vector<fs::path> inputs = {
      RequireFile(c.paths.embedding, "paths.embedding"),
      RequireFile(c.paths.features, "paths.features"),
      RequireFile(c.paths.supervision, "paths.supervision")};
  auto emb = std::make_shared<const WordEmbedding>(LoadEmbedding(inputs[0]));
  const auto features = ReadFeatureFile(inputs[1]);
  const auto records = ReadSupervisionFile(inputs[2], features);
  const JointDataset dataset(records, emb->vocabulary());

  std::string curve = "epoch\tloss\n";
  const JointTrainingResult result = TrainJoint(dataset, emb, c.joint, [&](int epoch, double loss) {
    char line[64];
    std::snprintf(line, sizeof line, "%d\t%.9g\n", epoch + 1, loss);
    curve += line;
    out << "epoch " << epoch + 1 << " loss " << loss << "\n";
  });
  const fs::path dir = PrepareOut(c);
  SaveCheckpoint(dir / "checkpoint.json", result.model, c.joint, c.paths.embedding);
  WriteText(dir / "curve.tsv", curve);

  json manifest = Manifest("train-joint", c, inputs);
  manifest["supervision"] = c.joint.ActiveSupervisions();
  manifest["joint_seed"] = c.joint.seed;
  manifest["records"] = dataset.size();
  manifest["final_loss"] = result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back();
  manifest["embedding_checksum"] = Hex(emb->Checksum());
  WriteJson(dir / "manifest.json", manifest);
  return 0;
}

// ------------------------------------------------------------ extract-features

int ExtractFeatures(const RunConfig& c, std::ostream& out) {
  const fs::path list = RequireFile(c.paths.audio_list, "paths.audio_list");
  std::ifstream in(list, std::ios::binary);
  if (!in) throw IoError("cannot read " + list.string());
  std::vector<ClipFeatures> clips;
  std::vector<fs::path> inputs = {list};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, '\t');) cols.push_back(col);
    if (cols.size() != 3) {
      throw ParseError(list.string(), line_no, "expected columns clip_id, track_id, wav path");
    }
    fs::path wav = cols[2];
    if (wav.is_relative()) wav = list.parent_path() / wav;
    RequireFile(wav.string(), "audio file");
    inputs.push_back(wav);
    Audio audio = ReadWavAt(wav, c.mel.sample_rate);
    if (c.extract.excerpt_seconds > 0) {
      Rng rng(DeriveSeed(c.seed, "excerpt", clips.size()));
      audio.samples = Excerpt(audio.samples, c.extract.excerpt_seconds, c.mel.sample_rate, rng);
    }
    clips.push_back({cols[0], cols[1], Summarize(LogMelSpectrogram(audio.samples, c.mel))});
  }
  const fs::path dir = PrepareOut(c);
  WriteFeatureFile(dir / "features.jsonl", clips);
  json manifest = Manifest("extract-features", c, inputs);
  manifest["clips"] = clips.size();
  WriteJson(dir / "manifest.json", manifest);
  out << "extracted " << clips.size() << " clips\n";
  return 0;
}

// ------------------------------------------------------------------------ eval

// Tag and track vectors in one space: word embedding rows, or joint
// prototypes and averaged audio embeddings.
struct VectorSpace {
  std::map<std::string, Eigen::VectorXd> tags;
  std::map<std::string, Eigen::VectorXd> tracks;
  std::vector<std::string> skipped_tags;
  std::vector<std::string> skipped_tracks;

  double Score(const std::string& tag, const std::string& track) const {
    return Similarity(tags.at(tag), tracks.at(track));
  }
};

Eigen::VectorXd ToEigen(std::span<const float> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

std::shared_ptr<const WordEmbedding> LoadWordEmbedding(const RunConfig& c,
                                                       std::vector<fs::path>& inputs) {
  inputs.push_back(RequireFile(c.paths.embedding, "paths.embedding"));
  return std::make_shared<const WordEmbedding>(LoadEmbedding(inputs.back()));
}

// Loads the checkpoint and the embedding it was trained against, which must
// be unchanged since training.
JointModel LoadJointModel(const RunConfig& c, std::vector<fs::path>& inputs) {
  inputs.push_back(RequireFile(c.paths.checkpoint, "paths.checkpoint"));
  const Checkpoint ck = LoadCheckpoint(inputs.back());
  const std::string emb_path = c.paths.embedding.empty() ? ck.embedding_path : c.paths.embedding;
  inputs.push_back(RequireFile(emb_path, "checkpoint embedding"));
  auto emb = std::make_shared<const WordEmbedding>(LoadEmbedding(inputs.back()));
  if (emb->Checksum() != ck.embedding_checksum) {
    throw InvalidArgument("embedding '" + emb_path +
                          "' does not match the one the checkpoint was trained with");
  }
  return ck.Bind(std::move(emb));
}

VectorSpace BuildSpace(const RunConfig& c, const EvalDataset& ds,
                       std::vector<fs::path>& inputs) {
  VectorSpace space;
  auto add = [](std::map<std::string, Eigen::VectorXd>& into, std::vector<std::string>& skipped,
                const std::string& name, std::optional<Eigen::VectorXd> v) {
    if (v && v->norm() > 0) {
      into.emplace(name, std::move(*v));
    } else {
      skipped.push_back(name);
    }
  };
  if (c.eval.source == "word") {
    const auto emb = LoadWordEmbedding(c, inputs);
    const Vocabulary& vocab = emb->vocabulary();
    auto lookup = [&](const std::string& t) -> std::optional<Eigen::VectorXd> {
      if (auto id = vocab.Find(t)) return ToEigen(emb->vector(*id));
      return std::nullopt;
    };
    for (const auto& tag : ds.AllTags()) add(space.tags, space.skipped_tags, tag, lookup(tag));
    for (const auto& tr : ds.AllTracks()) add(space.tracks, space.skipped_tracks, tr, lookup(tr));
    return space;
  }
  const JointModel model = LoadJointModel(c, inputs);
  inputs.push_back(RequireFile(c.paths.features, "paths.features"));
  std::map<std::string, std::vector<ClipFeatures>> by_track;
  for (auto& clip : ReadFeatureFile(inputs.back())) by_track[clip.track_id].push_back(clip);
  const Vocabulary& vocab = model.semantic.embedding->vocabulary();
  for (const auto& tag : ds.AllTags()) {
    std::optional<Eigen::VectorXd> v;
    if (auto id = vocab.Find(tag)) v = model.semantic.Encode(*id);
    add(space.tags, space.skipped_tags, tag, v);
  }
  for (const auto& tr : ds.AllTracks()) {
    std::optional<Eigen::VectorXd> v;
    if (auto it = by_track.find(tr); it != by_track.end()) {
      v = TrackEmbedding(model.audio, it->second);
    }
    add(space.tracks, space.skipped_tracks, tr, v);
  }
  return space;
}

std::vector<std::string> Present(const std::vector<std::string>& names,
                                 const std::map<std::string, Eigen::VectorXd>& have) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (have.count(n)) out.push_back(n);
  }
  return out;
}

std::vector<std::string> SplitTracks(const EvalDataset& ds, const std::string& split) {
  std::vector<std::string> out;
  for (const auto& t : ds.AllTracks()) {
    if (split == "all") {
      out.push_back(t);
      continue;
    }
    const TrackSplit s = ds.track_split.at(t);
    if ((split == "train" && s == TrackSplit::kTrain) ||
        (split == "valid" && s == TrackSplit::kValid) ||
        (split == "test" && s == TrackSplit::kTest)) {
      out.push_back(t);
    }
  }
  return out;
}

int Eval(const std::string& task, const RunConfig& c, std::ostream& out) {
  std::vector<fs::path> inputs = {RequireFile(c.paths.annotations, "paths.annotations"),
                                  RequireFile(c.paths.tag_metadata, "paths.tag_metadata")};
  const EvalDataset ds = ReadEvalDataset(inputs[0], inputs[1]);
  json report = {{"task", task}, {"source", c.eval.source}};

  if (task == "tag-rank") {
    if (c.eval.source != "word") {
      throw InvalidArgument("tag-rank scores the word embedding; use --source word");
    }
    const auto emb = LoadWordEmbedding(c, inputs);
    const TagRankReport r = TagRankPrediction(*emb, ds.annotations, ds.tag_categories, c.eval.k);
    report["results"] = r.ToJson();
    out << "tag-rank average nDCG@" << c.eval.k << " " << r.average << "\n";
  } else if (task == "zero-shot") {
    const ZeroShotSpec spec = ZeroShotProtocol(ds);
    const VectorSpace space = BuildSpace(c, ds, inputs);
    const ScoreFn score = [&](const std::string& g, const std::string& t) {
      return space.Score(g, t);
    };
    const auto retrieval = QueryByTagEval(score, ds.annotations,
                                          Present(spec.retrieval.tags, space.tags),
                                          Present(spec.retrieval.tracks, space.tracks));
    const auto tagging = TaggingEval(score, ds.annotations, Present(spec.tagging.tags, space.tags),
                                     Present(spec.tagging.tracks, space.tracks));
    report["results"] = {{"retrieval", retrieval.ToJson()}, {"tagging", tagging.ToJson()}};
    report["skipped"] = {{"tags", space.skipped_tags}, {"tracks", space.skipped_tracks}};
    out << "zero-shot unseen-tag ROCAUC_tag " << retrieval.aggregate << ", ROCAUC_clip "
        << tagging.aggregate << "\n";
  } else {
    const VectorSpace space = BuildSpace(c, ds, inputs);
    const auto tracks = Present(SplitTracks(ds, c.eval.track_split), space.tracks);
    const auto tags = Present(ds.AllTags(), space.tags);
    const ScoreFn score = [&](const std::string& g, const std::string& t) {
      return space.Score(g, t);
    };
    if (task == "query-by-tag") {
      const auto r = QueryByTagEval(score, ds.annotations, tags, tracks);
      report["results"] = r.ToJson();
      out << "query-by-tag ROCAUC_tag " << r.aggregate << "\n";
    } else if (task == "tagging") {
      const auto r = TaggingEval(score, ds.annotations, tags, tracks);
      report["results"] = r.ToJson();
      out << "tagging ROCAUC_clip " << r.aggregate << "\n";
    } else {
      const TrackSimilarityFn sim = [&](const std::string& q, const std::string& t) {
        return Similarity(space.tracks.at(q), space.tracks.at(t));
      };
      json results = json::array();
      for (const auto& r : QueryByTrackEval(sim, ds.annotations, tracks, c.eval.recall_ks)) {
        results.push_back(r.ToJson());
        out << "query-by-track " << r.metric << " " << r.aggregate << "\n";
      }
      report["results"] = results;
    }
    report["skipped"] = {{"tags", space.skipped_tags}, {"tracks", space.skipped_tracks}};
  }
  const fs::path dir = PrepareOut(c);
  WriteJson(dir / "report.json", report);
  WriteJson(dir / "manifest.json", Manifest("eval " + task, c, inputs));
  return 0;
}

// ----------------------------------------------------------------------- query

int Query(const Flags& f, const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (f.words.empty()) throw InvalidArgument("query needs at least one word");
  std::optional<KindSet> filter;
  if (!f.kinds.empty()) {
    KindSet kinds;
    std::stringstream ss(f.kinds);
    for (std::string name; std::getline(ss, name, ',');) kinds.insert(ParseTokenKind(name));
    filter = kinds;
  }
  std::vector<std::string> tokens;
  for (const auto& w : f.words) {
    for (auto& t : Tokenize(w)) tokens.push_back(std::move(t));
  }
  std::vector<fs::path> inputs;
  std::shared_ptr<const WordEmbedding> emb;
  if (!c.paths.checkpoint.empty()) {
    // Joint space: every token's prototype g(token).
    const JointModel model = LoadJointModel(c, inputs);
    const Vocabulary& vocab = model.semantic.embedding->vocabulary();
    const auto dim = static_cast<std::size_t>(model.semantic.weight.rows());
    std::vector<float> rows;
    rows.reserve(vocab.size() * dim);
    for (std::size_t id = 0; id < vocab.size(); ++id) {
      const Eigen::VectorXd g = model.semantic.Encode(static_cast<TokenId>(id));
      for (Eigen::Index i = 0; i < g.size(); ++i) rows.push_back(static_cast<float>(g[i]));
    }
    emb = std::make_shared<const WordEmbedding>(vocab, dim, std::move(rows));
  } else {
    emb = LoadWordEmbedding(c, inputs);
  }
  const QueryVector q = MakeQueryVector(tokens, *emb);
  if (!q.skipped.empty()) {
    err << "skipped out-of-vocabulary:";
    for (const auto& s : q.skipped) err << ' ' << s;
    err << "\n";
  }
  for (const Neighbor& n : Nearest(q.vector, f.top_k, filter, *emb)) {
    char score[32];
    std::snprintf(score, sizeof score, "%.6f", n.score);
    out << n.token << '\t' << TokenKindName(n.kind) << '\t' << score << '\n';
  }
  return 0;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Musical word embeddings: corpus building, skip-gram training, "
               "audio-word joint training and evaluation"};
  app.name("mwe");
  app.require_subcommand(1);
  Flags f;

  auto* build = app.add_subcommand("build-corpus", "Build the vocabulary and corpus shards");
  auto* word = app.add_subcommand("train-word", "Train the skip-gram word embedding");
  auto* joint = app.add_subcommand("train-joint", "Train the audio-word joint embedding");
  auto* extract = app.add_subcommand("extract-features", "Summarize WAV clips as log-mel features");
  auto* eval = app.add_subcommand("eval", "Evaluate an embedding");
  auto* query = app.add_subcommand("query", "Nearest tokens to a multi-word query");
  eval->require_subcommand(1);
  const std::vector<std::string> tasks = {"tag-rank", "query-by-tag", "query-by-track",
                                          "tagging", "zero-shot"};
  std::vector<CLI::App*> task_apps;
  for (const auto& t : tasks) {
    auto* sub = eval->add_subcommand(t, "Run the " + t + " evaluation");
    AddCommonFlags(sub, f);
    sub->add_option_function<std::string>(
        "--source", [&f](const std::string& v) { f.source = v; }, "word or joint");
    sub->add_option_function<std::size_t>(
        "-k", [&f](const std::size_t& v) { f.k = v; }, "nDCG cutoff (tag-rank)");
    task_apps.push_back(sub);
  }
  for (auto* sub : {build, word, joint, extract, query}) AddCommonFlags(sub, f);
  joint->add_option_function<double>(
      "--lambda-tag", [&f](const double& v) { f.lambda_tag = v; }, "Tag supervision weight");
  joint->add_option_function<double>(
      "--lambda-artist", [&f](const double& v) { f.lambda_artist = v; },
      "Artist supervision weight");
  joint->add_option_function<double>(
      "--lambda-track", [&f](const double& v) { f.lambda_track = v; }, "Track supervision weight");
  query->add_option("words", f.words, "Query words")->required();
  query->add_option("-k", f.top_k, "Number of results")->check(CLI::PositiveNumber);
  query->add_option("--kind", f.kinds, "Comma-separated kinds: general,review,tag,artist,track");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig c = ResolveConfig(f);
    if (build->parsed()) return BuildCorpus(c, out);
    if (word->parsed()) return TrainWord(c, out);
    if (joint->parsed()) return TrainJointCommand(c, out);
    if (extract->parsed()) return ExtractFeatures(c, out);
    if (query->parsed()) return Query(f, c, out, err);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (task_apps[i]->parsed()) return Eval(tasks[i], c, out);
    }
    err << "error: no subcommand\n";
    return 2;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const mwe::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mwe::cli
