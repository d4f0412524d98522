#include <gtest/gtest.h>
#include <zlib.h>

#include <fstream>
#include <sstream>

#include "sombra/ingest.hpp"
#include "sombra/io.hpp"

#include "test_util.hpp"

using namespace sombra;

namespace {

std::string fixture_text() {
  std::ifstream in(std::string(SOMBRA_TEST_DATA) + "/medline_3.xml", std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string gzip(const std::string& plain) {
  z_stream zs{};
  deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY);
  std::string out(deflateBound(&zs, plain.size()) + 64, '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(plain.data()));
  zs.avail_in = static_cast<uInt>(plain.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  return out;
}

MedlineCorpus parse(const std::string& text, std::optional<Vocabulary> vocab = std::nullopt) {
  std::istringstream in(text);
  return parse_medline_xml(in, std::move(vocab));
}

std::string article(const std::string& pmid, const std::vector<std::string>& uis) {
  std::string s = "<PubmedArticle><MedlineCitation>";
  if (!pmid.empty()) s += "<PMID Version=\"1\">" + pmid + "</PMID>";
  s += "<MeshHeadingList>";
  for (const auto& u : uis) {
    s += "<MeshHeading><DescriptorName UI=\"" + u + "\">x</DescriptorName></MeshHeading>";
  }
  return s + "</MeshHeadingList></MedlineCitation></PubmedArticle>";
}

std::string wrap(const std::string& body) { return "<PubmedArticleSet>" + body + "</PubmedArticleSet>"; }

}  // namespace

TEST(Medline, FixtureMatchesHandBuiltMatrix) {
  const auto c = parse(fixture_text());
  EXPECT_EQ(c.vocab.ids(),
            (std::vector<std::string>{"D000001", "D005260", "D006801", "D009369", "D012345"}));
  const SparseBinaryMatrix want(3, 5, {0, 2, 2, 6}, {0, 4, 0, 1, 2, 3});
  EXPECT_EQ(c.matrix, want);
  EXPECT_EQ(c.pmids, (std::vector<std::string>{"100", "200", "300"}));
  EXPECT_EQ(c.stats.articles_seen, 3u);
  EXPECT_EQ(c.stats.skipped_no_pmid, 0u);
  EXPECT_EQ(c.stats.headings, 6u);
}

TEST(Medline, EmptyMeshArticleKeepsEmptyRow) {
  const auto c = parse(fixture_text());
  ASSERT_EQ(c.matrix.n_rows(), 3u);
  EXPECT_EQ(c.matrix.row_nnz(1), 0u);
}

TEST(Medline, VocabularyRoundTrip) {
  const auto c = parse(fixture_text());
  std::stringstream buf;
  save_vocab(c.vocab, buf);
  const auto back = load_vocab(buf);
  EXPECT_EQ(back, c.vocab);
  // Re-ingesting against the saved vocabulary reproduces the matrix.
  EXPECT_EQ(parse(fixture_text(), back).matrix, c.matrix);
}

TEST(Medline, SingleArticleTwoHeadings) {
  const auto c = parse(wrap(article("7", {"D012345", "D000001"})));
  EXPECT_EQ(c.vocab.size(), 2u);
  ASSERT_EQ(c.matrix.n_rows(), 1u);
  EXPECT_EQ(c.matrix.row_nnz(0), 2u);
}

TEST(Medline, GzipInput) {
  const auto plain = parse(fixture_text());
  const auto z = gzip(fixture_text());
  ASSERT_EQ(static_cast<unsigned char>(z[0]), 0x1f);
  const auto packed = parse(z);
  EXPECT_EQ(packed.matrix, plain.matrix);
  EXPECT_EQ(packed.vocab, plain.vocab);
  // Concatenated members decode as one stream.
  const auto two = parse(gzip("<PubmedArticleSet>") + gzip(article("1", {"D1"}) + "</PubmedArticleSet>"));
  EXPECT_EQ(two.matrix.n_rows(), 1u);
}

TEST(Medline, MissingPmidIsSkippedAndCounted) {
  const auto c = parse(wrap(article("", {"D1"}) + article("5", {"D2"})));
  EXPECT_EQ(c.matrix.n_rows(), 1u);
  EXPECT_EQ(c.stats.skipped_no_pmid, 1u);
  EXPECT_EQ(c.pmids, (std::vector<std::string>{"5"}));
}

TEST(Medline, DuplicatePmidLastWins) {
  const auto c = parse(wrap(article("5", {"D1"}) + article("6", {"D2"}) + article("5", {"D3"})));
  EXPECT_EQ(c.stats.duplicate_pmids, 1u);
  EXPECT_EQ(c.pmids, (std::vector<std::string>{"5", "6"}));
  ASSERT_EQ(c.matrix.n_rows(), 2u);
  EXPECT_EQ(c.vocab.id(c.matrix.row(0)[0]), "D3");
}

TEST(Medline, FixedVocabularyDropsUnknownIds) {
  Vocabulary v({"D2", "D1"});
  const auto c = parse(wrap(article("1", {"D1", "D9"}) + article("2", {"D2", "D1", "D8", "D7"})), v);
  EXPECT_EQ(c.vocab, v);
  EXPECT_EQ(c.stats.dropped_unknown, 3u);
  EXPECT_EQ(c.stats.headings, 6u);
  EXPECT_EQ(c.stats.dropped_unknown + c.matrix.nnz(), c.stats.headings);
  EXPECT_EQ(test::vec(c.matrix.indices()), (std::vector<ColumnId>{1, 0, 1}));
}

TEST(Medline, IgnoresQualifiersAndForeignDescriptors) {
  const std::string body =
      "<PubmedArticle><MedlineCitation><PMID>1</PMID>"
      "<SupplMeshList><SupplMeshName UI=\"C1\">s</SupplMeshName></SupplMeshList>"
      "<DescriptorName UI=\"D404\">outside a heading</DescriptorName>"
      "<MeshHeadingList><MeshHeading><DescriptorName UI=\"D1\">d</DescriptorName>"
      "<QualifierName UI=\"Q1\">q</QualifierName></MeshHeading></MeshHeadingList>"
      "</MedlineCitation></PubmedArticle>";
  const auto c = parse(wrap(body));
  EXPECT_EQ(c.vocab.ids(), (std::vector<std::string>{"D1"}));
}

TEST(Medline, OrderStable) {
  const auto a = parse(fixture_text());
  const auto b = parse(fixture_text());
  EXPECT_EQ(a.matrix, b.matrix);
  EXPECT_EQ(a.pmids, b.pmids);
}

TEST(Medline, MalformedXmlReportsByteOffset) {
  for (const char* bad : {"<PubmedArticleSet><PubmedArticle></PubmedArticleSet>",
                          "<PubmedArticleSet><PubmedArticle>",
                          "<PubmedArticleSet><A x=1/></PubmedArticleSet>",
                          "<PubmedArticleSet><!-- unterminated"}) {
    try {
      parse(bad);
      ADD_FAILURE() << "accepted: " << bad;
    } catch (const ParseError& e) {
      EXPECT_NE(std::string(e.what()).find("byte "), std::string::npos) << e.what();
    }
  }
  const std::string text = "<PubmedArticleSet><PubmedArticle></Oops></PubmedArticleSet>";
  try {
    parse(text);
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("at byte 40"), std::string::npos) << e.what();
  }
}

TEST(Medline, CollectorConcatenatesFiles) {
  MedlineCollector col;
  std::istringstream a(wrap(article("1", {"D2"})));
  std::istringstream b(wrap(article("2", {"D1"}) + article("1", {"D3"})));
  col.add_stream(a);
  col.add_stream(b);
  const auto c = col.finish();
  EXPECT_EQ(c.pmids, (std::vector<std::string>{"1", "2"}));
  EXPECT_EQ(c.stats.duplicate_pmids, 1u);
  EXPECT_EQ(c.vocab.ids(), (std::vector<std::string>{"D1", "D2", "D3"}));
  EXPECT_EQ(test::vec(c.matrix.indices()), (std::vector<ColumnId>{2, 0}));
}

TEST(Medline, MissingFileIsIoError) {
  MedlineCollector col;
  EXPECT_THROW(col.add_file("/nonexistent/file.xml"), IoError);
}

TEST(Synth, MeanRowSize) {
  const auto x = synth_generate({.n = 10000, .d = 1000, .seed = 5});
  const double mean = static_cast<double>(x.nnz()) / 10000.0;
  EXPECT_NEAR(mean, 10.0, 0.1);
  for (std::size_t i = 0; i < x.n_rows(); ++i) {
    EXPECT_GE(x.row_nnz(i), 5u);
    EXPECT_LE(x.row_nnz(i), 15u);
  }
}

TEST(Synth, SameSeedSameMatrix) {
  SynthOptions o{.n = 500, .d = 300, .seed = 11};
  EXPECT_EQ(synth_generate(o), synth_generate(o));
  auto o2 = o;
  o2.seed = 12;
  EXPECT_NE(synth_generate(o), synth_generate(o2));
}

TEST(Synth, ClusteredRowsStayInBand) {
  std::vector<std::uint32_t> cluster;
  const auto x = synth_generate({.n = 2000, .d = 100, .seed = 2, .clusters = 4}, &cluster);
  for (std::size_t i = 0; i < x.n_rows(); ++i) {
    const auto r = x.row(i);
    ASSERT_FALSE(r.empty());
    EXPECT_EQ(r.front() / 25, r.back() / 25) << "row " << i;
    EXPECT_EQ(r.front() / 25, cluster[i]);
  }
  const auto y = synth_generate({.n = 2000, .d = 100, .seed = 2, .clusters = 4, .overlap = 3}, &cluster);
  for (std::size_t i = 0; i < y.n_rows(); ++i) {
    const auto r = y.row(i);
    const long lo = static_cast<long>(cluster[i]) * 25 - 3;
    const long hi = static_cast<long>(cluster[i]) * 25 + 25 + 3;
    EXPECT_GE(static_cast<long>(r.front()), lo);
    EXPECT_LT(static_cast<long>(r.back()), hi);
  }
}

TEST(Synth, NoDuplicatesAndValidCsr) {
  const auto x = synth_generate({.n = 3000, .d = 20, .nnz_low = 15, .nnz_high = 20, .seed = 3});
  for (std::size_t i = 0; i < x.n_rows(); ++i) {
    const auto r = x.row(i);
    for (std::size_t p = 1; p < r.size(); ++p) EXPECT_LT(r[p - 1], r[p]);
  }
}

TEST(Synth, ArgumentErrors) {
  EXPECT_THROW(synth_generate({.n = 5, .d = 10, .nnz_low = 5, .nnz_high = 11}), ArgumentError);
  EXPECT_THROW(synth_generate({.n = 5, .d = 40, .nnz_low = 5, .nnz_high = 15, .clusters = 4}),
               ArgumentError);
  EXPECT_THROW(synth_generate({.n = 5, .d = 40, .nnz_low = 6, .nnz_high = 5}), ArgumentError);
}
