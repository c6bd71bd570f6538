// Command-line surface: data generation, training, correction, scoring and
// diagnostics for the tree-to-tree correction toolkit.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "treeformer/checkpoint.hpp"
#include "treeformer/config_file.hpp"
#include "treeformer/decode.hpp"
#include "treeformer/edit_distance.hpp"
#include "treeformer/grad_check.hpp"
#include "treeformer/taskbench.hpp"
#include "treeformer/train.hpp"

namespace tf = treeformer;

namespace {

tf::ModelConfig model_config_from(const tf::ConfigFile& cfg, int src_vocab,
                                  int tgt_vocab) {
  tf::ModelConfig m;
  m.n_layers = static_cast<int>(cfg.get_int("N", m.n_layers));
  m.d_model = static_cast<int>(cfg.get_int("d_model", m.d_model));
  m.d_ff = static_cast<int>(cfg.get_int("d_ff", m.d_ff));
  m.heads = static_cast<int>(cfg.get_int("h", m.heads));
  m.d_k = static_cast<int>(cfg.get_int("d_k", m.d_k));
  m.d_v = static_cast<int>(cfg.get_int("d_v", m.d_v));
  m.p_drop = cfg.get_double("p_drop", m.p_drop);
  m.p_dattn = cfg.get_double("p_dattn", m.p_dattn);
  m.p_dff = cfg.get_double("p_dff", m.p_dff);
  m.p_des = cfg.get_double("p_des", m.p_des);
  m.p_det = cfg.get_double("p_det", m.p_det);
  m.eps_ls = cfg.get_double("eps_ls", m.eps_ls);
  m.src_vocab = src_vocab;
  m.tgt_vocab = tgt_vocab;
  return m;
}

tf::TrainConfig train_config_from(const tf::ConfigFile& cfg) {
  tf::TrainConfig t;
  t.mode = tf::train_mode_from_name(cfg.get_string("mode", "tree2tree"));
  t.warmup_steps = static_cast<int>(
      cfg.get_int("warmup", t.mode == tf::TrainMode::tree2tree ? 16'000 : 4'000));
  t.lr_scale = cfg.get_double("lr", -1.0);
  t.train_steps = static_cast<int>(cfg.get_int("train_steps", t.train_steps));
  t.batch_cap = static_cast<int>(cfg.get_int("batch_cap", t.batch_cap));
  t.edit_weight = cfg.get_double("edit_weight", t.edit_weight);
  t.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  t.checkpoint_interval =
      static_cast<int>(cfg.get_int("checkpoint_interval", t.checkpoint_interval));
  t.log_interval = static_cast<int>(cfg.get_int("log_interval", t.log_interval));
  return t;
}

std::vector<std::vector<tf::TreeNode>> load_reference_lines(const std::string& path,
                                                            const tf::Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) tf::fail(tf::ErrorCode::IoError, "cannot open reference file " + path);
  std::vector<std::vector<tf::TreeNode>> out;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<tf::TreeNode> refs;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t tab = line.find('\t', start);
      std::string piece = line.substr(start, tab == std::string::npos ? std::string::npos
                                                                      : tab - start);
      if (!piece.empty()) refs.push_back(tf::parse_sexpr(piece, vocab));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (refs.empty()) tf::fail(tf::ErrorCode::SyntaxError, "empty reference line");
    out.push_back(std::move(refs));
  }
  return out;
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

struct GenDataArgs {
  std::string grammar_path;
  std::string out_prefix;
  int count = 1000;
  int heldout = 0;
  std::uint64_t seed = 1;
  std::vector<std::string> corruptions;
  int max_depth = 8;
  int max_nodes = 25;
  int corrupt_min = 1;
  int corrupt_max = 1;
  bool no_dedup = false;
};

void write_pairs(const std::string& src_path, const std::string& tgt_path,
                 const std::vector<std::pair<tf::TreeNode, tf::TreeNode>>& pairs,
                 const tf::Vocabulary& vocab) {
  std::ofstream src(src_path);
  std::ofstream tgt(tgt_path);
  if (!src || !tgt) tf::fail(tf::ErrorCode::IoError, "cannot write pair files");
  for (const auto& [bad, good] : pairs) {
    src << tf::to_sexpr(bad, vocab) << '\n';
    tgt << tf::to_sexpr(good, vocab) << '\n';
  }
}

int run_gen_data(const GenDataArgs& args) {
  tf::GrammarSpec grammar = tf::load_grammar(args.grammar_path);
  std::vector<tf::CorruptionOp> ops;
  for (const std::string& spec : args.corruptions) {
    auto eq = spec.find('=');
    std::string name = eq == std::string::npos ? spec : spec.substr(0, eq);
    double weight = eq == std::string::npos ? 1.0 : std::stod(spec.substr(eq + 1));
    ops.push_back({tf::corruption_kind_from_name(name), weight});
  }
  if (ops.empty()) ops.push_back({tf::CorruptionKind::RelabelNode, 1.0});

  tf::SampleOptions opt;
  opt.max_depth = args.max_depth;
  opt.max_nodes = args.max_nodes;
  opt.corrupt_min = args.corrupt_min;
  opt.corrupt_max = args.corrupt_max;

  tf::Rng rng(args.seed);
  std::vector<std::pair<tf::TreeNode, tf::TreeNode>> raw;
  for (int i = 0; i < args.count + args.heldout; ++i)
    raw.push_back(tf::sample_pair(grammar, ops, rng, opt));

  std::vector<std::pair<tf::TreeNode, std::vector<tf::TreeNode>>> merged;
  if (args.no_dedup) {
    for (auto& [bad, good] : raw) merged.push_back({bad, {good}});
  } else {
    merged = tf::dedup(raw);
  }

  // Unique bads split train/heldout; train pairs are flattened per good.
  std::size_t train_bads =
      args.heldout == 0
          ? merged.size()
          : merged.size() - std::min<std::size_t>(merged.size() / 2,
                                                  static_cast<std::size_t>(args.heldout));
  std::vector<std::pair<tf::TreeNode, tf::TreeNode>> train_pairs;
  for (std::size_t i = 0; i < train_bads; ++i)
    for (const auto& good : merged[i].second)
      train_pairs.push_back({merged[i].first, good});

  grammar.vocab.save(args.out_prefix + ".vocab");
  write_pairs(args.out_prefix + ".train.src.sexp", args.out_prefix + ".train.tgt.sexp",
              train_pairs, grammar.vocab);

  if (args.heldout > 0) {
    std::ofstream src(args.out_prefix + ".test.src.sexp");
    std::ofstream refs(args.out_prefix + ".test.refs.sexp");
    if (!src || !refs) tf::fail(tf::ErrorCode::IoError, "cannot write test files");
    for (std::size_t i = train_bads; i < merged.size(); ++i) {
      src << tf::to_sexpr(merged[i].first, grammar.vocab) << '\n';
      for (std::size_t r = 0; r < merged[i].second.size(); ++r)
        refs << (r ? "\t" : "") << tf::to_sexpr(merged[i].second[r], grammar.vocab);
      refs << '\n';
    }
    std::cout << "wrote " << train_pairs.size() << " train pairs, "
              << merged.size() - train_bads << " held-out sources\n";
  } else {
    std::cout << "wrote " << train_pairs.size() << " train pairs\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int run_train(const std::string& config_path, const std::string& resume_path) {
  tf::ConfigFile cfg = tf::ConfigFile::load(config_path);
  tf::Vocabulary vocab = tf::Vocabulary::load(cfg.require_string("vocab"));
  tf::TrainConfig tcfg = train_config_from(cfg);
  tf::ModelConfig mcfg = model_config_from(cfg, static_cast<int>(vocab.size()),
                                           static_cast<int>(vocab.size()));

  std::vector<tf::TreeNode> tgt_trees =
      tf::load_trees(cfg.require_string("train_tgt"), vocab);
  std::vector<tf::TreeNode> src_trees;
  if (tcfg.mode == tf::TrainMode::tree2tree) {
    src_trees = tf::load_trees(cfg.require_string("train_src"), vocab);
    if (src_trees.size() != tgt_trees.size())
      tf::fail(tf::ErrorCode::BadConfig, "train_src/train_tgt line counts differ");
  } else {
    src_trees = tgt_trees;  // lm ignores sources; denoising reconstructs them
  }

  std::vector<tf::PreparedPair> data;
  data.reserve(tgt_trees.size());
  for (std::size_t i = 0; i < tgt_trees.size(); ++i)
    data.push_back(tf::prepare_pair(src_trees[i], tgt_trees[i], vocab, tcfg.mode,
                                    tcfg.edit_weight));

  std::string out_dir = cfg.get_string("out_dir", "run");
  std::filesystem::create_directories(out_dir);
  std::ofstream log(out_dir + "/train.log");
  if (!log) tf::fail(tf::ErrorCode::IoError, "cannot write " + out_dir + "/train.log");

  tf::Trainer trainer(mcfg, tcfg, vocab, std::move(data));
  if (!resume_path.empty()) {
    tf::Checkpoint ckpt = tf::load_checkpoint(resume_path);
    trainer.restore(std::move(ckpt.params), std::move(ckpt.adam), ckpt.step,
                    ckpt.rng_state, ckpt.epoch, ckpt.batch_index);
  }

  auto save = [&](const std::string& name) {
    tf::Checkpoint ckpt;
    ckpt.model = mcfg;
    ckpt.vocab = vocab;
    ckpt.params = trainer.params();
    ckpt.adam = trainer.adam();
    ckpt.step = trainer.steps_done();
    ckpt.rng_state = trainer.rng_state();
    ckpt.epoch = trainer.epoch();
    ckpt.batch_index = trainer.batch_index();
    tf::save_checkpoint(ckpt, out_dir + "/" + name);
  };

  char line[256];
  while (trainer.steps_done() < tcfg.train_steps) {
    tf::StepRecord rec = trainer.step();
    std::snprintf(line, sizeof(line), "step=%lld lr=%.10g loss=%.9g mode=%s wall_ms=%.3f",
                  static_cast<long long>(rec.step), rec.lr, rec.loss,
                  tf::train_mode_name(rec.mode), rec.wall_ms);
    log << line << '\n';
    if (tcfg.log_interval > 0 && rec.step % tcfg.log_interval == 0) {
      std::cout << line << std::endl;
      log.flush();
    }
    if (tcfg.checkpoint_interval > 0 && rec.step % tcfg.checkpoint_interval == 0)
      save("ckpt_step" + std::to_string(rec.step) + ".bin");
  }
  save("ckpt_final.bin");
  std::cout << "finished " << trainer.steps_done() << " steps; checkpoint at "
            << out_dir << "/ckpt_final.bin\n";
  return 0;
}

// ---------------------------------------------------------------------------
// correct
// ---------------------------------------------------------------------------

struct CorrectArgs {
  std::string checkpoint;
  std::string input;
  std::string output;
  std::string lm_checkpoint;
  std::string config;  // optional: beam_width / alpha / limit keys
  int beam_width = 6;
  int nbest = 1;
  double alpha = 0.0;
  int max_nodes = 512;
  int max_depth = 64;
  double length_norm = 0.0;
  bool with_scores = false;
};

int run_correct(CorrectArgs args) {
  if (!args.config.empty()) {
    tf::ConfigFile cfg = tf::ConfigFile::load(args.config);
    args.beam_width = static_cast<int>(cfg.get_int("beam_width", args.beam_width));
    args.alpha = cfg.get_double("alpha", args.alpha);
    args.max_nodes = static_cast<int>(cfg.get_int("max_nodes", args.max_nodes));
    args.max_depth = static_cast<int>(cfg.get_int("max_depth", args.max_depth));
    args.length_norm = cfg.get_double("length_norm", args.length_norm);
  }
  tf::Checkpoint ckpt = tf::load_checkpoint(args.checkpoint);
  std::vector<tf::TreeNode> sources = tf::load_trees(args.input, ckpt.vocab);

  std::optional<tf::Checkpoint> lm;
  if (!args.lm_checkpoint.empty()) {
    lm = tf::load_checkpoint(args.lm_checkpoint);
    if (lm->vocab.size() != ckpt.vocab.size())
      tf::fail(tf::ErrorCode::BadConfig, "LM and model vocabularies differ");
  }
  if (args.alpha > 0.0 && !lm)
    tf::fail(tf::ErrorCode::BadConfig, "alpha > 0 needs --lm-checkpoint");

  std::ofstream out(args.output);
  if (!out) tf::fail(tf::ErrorCode::IoError, "cannot write " + args.output);

  tf::BeamOptions opt;
  opt.width = args.beam_width;
  opt.nbest = args.nbest;
  opt.alpha = args.alpha;
  opt.length_norm = args.length_norm;
  opt.limits.max_nodes = args.max_nodes;
  opt.limits.max_depth = args.max_depth;

  tf::ModelScorer<float> lm_scorer =
      lm ? tf::ModelScorer<float>(lm->params, lm->model, lm->vocab)
         : tf::ModelScorer<float>(ckpt.params, ckpt.model, ckpt.vocab);
  tf::StepScorer lm_fn = lm_scorer;

  for (std::size_t i = 0; i < sources.size(); ++i) {
    tf::ModelScorer<float> scorer(ckpt.params, ckpt.model, ckpt.vocab);
    scorer.condition_on(tf::linearize(sources[i]));
    tf::StepScorer fn = scorer;
    std::vector<tf::DecodeResult> results =
        tf::beam_search(fn, lm ? &lm_fn : nullptr, ckpt.vocab, opt);
    if (args.nbest == 1 && !args.with_scores) {
      out << tf::to_sexpr(tf::delinearize(results[0].tree, ckpt.vocab), ckpt.vocab)
          << '\n';
    } else {
      for (std::size_t rank = 0; rank < results.size(); ++rank) {
        char head[64];
        std::snprintf(head, sizeof(head), "%zu\t%zu\t%.6f\t", i, rank,
                      results[rank].score);
        out << head
            << tf::to_sexpr(tf::delinearize(results[rank].tree, ckpt.vocab), ckpt.vocab)
            << (results[rank].truncated ? "\t[truncated]" : "") << '\n';
      }
    }
  }
  std::cout << "corrected " << sources.size() << " trees -> " << args.output << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int run_eval(const std::string& vocab_path, const std::string& sources_path,
             const std::string& hyp_path, const std::string& refs_path) {
  tf::Vocabulary vocab = tf::Vocabulary::load(vocab_path);
  std::vector<tf::TreeNode> sources = tf::load_trees(sources_path, vocab);
  std::vector<tf::TreeNode> hypotheses = tf::load_trees(hyp_path, vocab);
  std::vector<std::vector<tf::TreeNode>> references =
      load_reference_lines(refs_path, vocab);
  if (sources.size() != hypotheses.size() || sources.size() != references.size())
    tf::fail(tf::ErrorCode::BadConfig, "sources/hypotheses/references line counts differ");

  std::vector<tf::SentenceEdits> sentences;
  long long exact = 0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    std::vector<tf::TokenId> src_tokens = tf::leaf_tokens(sources[i], vocab);
    tf::SentenceEdits sentence;
    sentence.system = tf::extract_edits(src_tokens, tf::leaf_tokens(hypotheses[i], vocab));
    for (const auto& ref : references[i])
      sentence.references.push_back(
          tf::extract_edits(src_tokens, tf::leaf_tokens(ref, vocab)));
    sentences.push_back(std::move(sentence));
    exact += tf::exact_match(hypotheses[i], references[i]);
  }
  tf::ScoreReport report = tf::score_edits(sentences);
  std::printf("edits: precision=%.4f recall=%.4f f0.5=%.4f\n", report.precision,
              report.recall, report.f_half);
  std::printf("counts: matches=%lld system=%lld reference=%lld\n",
              report.counts.matches, report.counts.system_total,
              report.counts.reference_total);
  std::printf("exact_match: %lld/%zu = %.2f%%\n", exact, sources.size(),
              sources.empty() ? 0.0 : 100.0 * double(exact) / double(sources.size()));
  return 0;
}

// ---------------------------------------------------------------------------
// editdist
// ---------------------------------------------------------------------------

int run_editdist(const std::string& vocab_path, const std::string& a_text,
                 const std::string& b_text) {
  tf::Vocabulary vocab = tf::Vocabulary::load(vocab_path);
  tf::TreeNode a = tf::parse_sexpr(a_text, vocab);
  tf::TreeNode b = tf::parse_sexpr(b_text, vocab);
  tf::EditScript script = tf::tree_edit_distance(a, b);
  tf::DfTree da = tf::linearize(a);
  tf::DfTree db = tf::linearize(b);

  std::printf("distance %d\n", script.distance);
  for (const auto& pair : script.mapped)
    std::printf("%s %d %d %s %s\n",
                pair.tag == tf::EditScript::Tag::Match ? "match" : "relabel",
                pair.source, pair.target,
                vocab.name(da.tokens[static_cast<std::size_t>(pair.source)]).c_str(),
                vocab.name(db.tokens[static_cast<std::size_t>(pair.target)]).c_str());
  for (auto d : script.deleted)
    std::printf("delete %d - %s\n", d,
                vocab.name(da.tokens[static_cast<std::size_t>(d)]).c_str());
  for (auto i : script.inserted)
    std::printf("insert - %d %s\n", i,
                vocab.name(db.tokens[static_cast<std::size_t>(i)]).c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// grad-check
// ---------------------------------------------------------------------------

int run_grad_check(const std::string& config_path, double tolerance) {
  tf::ConfigFile cfg = tf::ConfigFile::load(config_path);

  tf::Vocabulary vocab;
  tf::TreeNode src_tree;
  tf::TreeNode tgt_tree;
  if (cfg.has("vocab")) {
    vocab = tf::Vocabulary::load(cfg.require_string("vocab"));
    src_tree = tf::parse_sexpr(cfg.require_string("src"), vocab);
    tgt_tree = tf::parse_sexpr(cfg.require_string("tgt"), vocab);
  } else {
    for (int i = 0; i < 3; ++i) vocab.add("P" + std::to_string(i), tf::TokenKind::Parent);
    for (int i = 0; i < 5; ++i) vocab.add("a" + std::to_string(i), tf::TokenKind::Leaf);
    vocab.add("<eos>", tf::TokenKind::EndOfSiblings);
    vocab.add("<pad>", tf::TokenKind::Pad);
    src_tree = tf::parse_sexpr("(P0 a0 (P1 a1 a2))", vocab);
    tgt_tree = tf::parse_sexpr("(P0 a3 (P2 a1) a4)", vocab);
  }

  tf::ModelConfig mcfg = model_config_from(cfg, static_cast<int>(vocab.size()),
                                           static_cast<int>(vocab.size()));
  tf::PreparedPair pair = tf::prepare_pair(src_tree, tgt_tree, vocab,
                                           tf::TrainMode::tree2tree,
                                           cfg.get_double("edit_weight", 3.0));

  tf::Rng rng(static_cast<std::uint64_t>(cfg.get_int("seed", 1)));
  tf::ParamStore<double> store = tf::make_params<double>(mcfg, &rng);

  tf::LossBuilder build = [&](tf::Tape<double>& tape, tf::ParamStore<double>& s) {
    tf::ForwardOptions opts;  // eval: dropout off
    std::vector<const tf::PreparedPair*> batch{&pair};
    return tf::batch_loss(tape, batch, s, mcfg, tf::TrainMode::tree2tree, opts,
                          vocab.pad_id());
  };

  tf::GradCheckOptions opt;
  opt.eps = cfg.get_double("eps", 1e-5);
  opt.coords_per_param = static_cast<int>(cfg.get_int("coords", 32));
  opt.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  tf::GradCheckReport report = tf::grad_check(build, store, opt);

  std::printf("%-24s %12s %8s %8s\n", "parameter", "max_rel_err", "checked", "skipped");
  for (const auto& per : report.params)
    std::printf("%-24s %12.3e %8d %8d\n", per.path.c_str(), per.max_rel_err,
                per.checked, per.excluded);
  std::printf("overall max relative error: %.3e (tolerance %.1e)\n", report.max_rel_err,
              tolerance);
  return report.max_rel_err < tolerance ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tree-to-tree grammar correction toolkit"};
  app.require_subcommand(1);

  GenDataArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("gen-data", "sample a synthetic correction corpus");
  cmd_gen->add_option("--grammar", gen.grammar_path, "grammar file")->required();
  cmd_gen->add_option("--out", gen.out_prefix, "output path prefix")->required();
  cmd_gen->add_option("--count", gen.count, "pairs to sample");
  cmd_gen->add_option("--heldout", gen.heldout, "held-out sources to split off");
  cmd_gen->add_option("--seed", gen.seed, "sampling seed");
  cmd_gen->add_option("--corrupt", gen.corruptions,
                      "corruption kind=weight (repeatable; default relabel=1)");
  cmd_gen->add_option("--max-depth", gen.max_depth, "tree depth cutoff");
  cmd_gen->add_option("--max-nodes", gen.max_nodes, "tree size cutoff");
  cmd_gen->add_option("--corrupt-min", gen.corrupt_min, "min corruptions per pair");
  cmd_gen->add_option("--corrupt-max", gen.corrupt_max, "max corruptions per pair");
  cmd_gen->add_flag("--no-dedup", gen.no_dedup, "skip bad-tree merging");

  std::string train_config;
  std::string resume;
  CLI::App* cmd_train = app.add_subcommand("train", "train from a config file");
  cmd_train->add_option("--config", train_config, "key = value config file")->required();
  cmd_train->add_option("--resume", resume, "checkpoint to resume from");

  CorrectArgs correct;
  CLI::App* cmd_correct = app.add_subcommand("correct", "decode corrected trees");
  cmd_correct->add_option("--checkpoint", correct.checkpoint, "model checkpoint")->required();
  cmd_correct->add_option("--input", correct.input, "source trees, one s-expression per line")->required();
  cmd_correct->add_option("--output", correct.output, "output file")->required();
  cmd_correct->add_option("--beam", correct.beam_width, "beam width");
  cmd_correct->add_option("--nbest", correct.nbest, "hypotheses per source");
  cmd_correct->add_option("--alpha", correct.alpha, "LM ensemble weight");
  cmd_correct->add_option("--lm-checkpoint", correct.lm_checkpoint, "LM checkpoint");
  cmd_correct->add_option("--max-nodes", correct.max_nodes, "generation node limit");
  cmd_correct->add_option("--max-depth", correct.max_depth, "generation depth limit");
  cmd_correct->add_option("--length-norm", correct.length_norm,
                          "rerank by score/length^e (default 0: off)");
  cmd_correct->add_option("--config", correct.config,
                          "optional config file (beam_width, alpha, max_nodes, max_depth)");
  cmd_correct->add_flag("--scores", correct.with_scores, "write indexed scored output");

  std::string eval_vocab, eval_sources, eval_hyp, eval_refs;
  CLI::App* cmd_eval = app.add_subcommand("eval", "score hypotheses against references");
  cmd_eval->add_option("--vocab", eval_vocab, "vocabulary file")->required();
  cmd_eval->add_option("--sources", eval_sources, "source trees")->required();
  cmd_eval->add_option("--hypotheses", eval_hyp, "hypothesis trees")->required();
  cmd_eval->add_option("--references", eval_refs,
                       "reference trees, tab-separated alternatives per line")->required();

  std::string ed_vocab, ed_a, ed_b;
  CLI::App* cmd_ed = app.add_subcommand("editdist", "tree edit distance and script");
  cmd_ed->add_option("--vocab", ed_vocab, "vocabulary file")->required();
  cmd_ed->add_option("tree_a", ed_a, "first tree (s-expression)")->required();
  cmd_ed->add_option("tree_b", ed_b, "second tree (s-expression)")->required();

  std::string gc_config;
  double gc_tol = 1e-4;
  CLI::App* cmd_gc = app.add_subcommand("grad-check", "finite-difference gradient audit");
  cmd_gc->add_option("--config", gc_config, "model config file")->required();
  cmd_gc->add_option("--tol", gc_tol, "failure tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_gen->parsed()) return run_gen_data(gen);
    if (cmd_train->parsed()) return run_train(train_config, resume);
    if (cmd_correct->parsed()) return run_correct(correct);
    if (cmd_eval->parsed()) return run_eval(eval_vocab, eval_sources, eval_hyp, eval_refs);
    if (cmd_ed->parsed()) return run_editdist(ed_vocab, ed_a, ed_b);
    if (cmd_gc->parsed()) return run_grad_check(gc_config, gc_tol);
  } catch (const tf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
