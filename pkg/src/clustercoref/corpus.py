"""Document and mention data model, corpus I/O, and mention categorization.

A corpus file holds one document per line as a JSON record (see
docs/formats.md).  Mentions are normalized to document order: sorted by the
document position of their head token, ties broken by span start.  Gold
cluster ids are optional; a mention without one is treated as non-anaphoric
(its own singleton entity).
"""

import json
from dataclasses import dataclass, field, replace

GENRES = ("bc", "bn", "mz", "nw", "pt", "tc", "wb")
MENTION_TYPES = ("proper", "nominal", "pronominal")
NUMBERS = ("singular", "plural", "unknown")
GENDERS = ("male", "female", "neuter", "unknown")

# Categories used by the error taxonomy: nominal/proper with a previous
# head match, nominal/proper without, and pronominal.
NOM_HM = "NomHM"
NOM_NO_HM = "NomNoHM"
PRON = "Pron"
CATEGORIES = (NOM_HM, NOM_NO_HM, PRON)


class CorpusError(ValueError):
    """Raised on malformed corpus files (carries the offending line number)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Mention:
    """One mention span.  Token offsets are 0-based and inclusive.

    ``n`` is the 1-based rank of the mention in document order and is
    assigned by the loader / constructor helpers, not by the input file.
    """

    n: int
    sent: int
    start: int
    end: int
    head: int
    mtype: str
    number: str
    gender: str
    head_str: str
    cluster: int | None = None


@dataclass(frozen=True)
class Document:
    id: str
    genre: str
    sentences: tuple
    speakers: tuple
    mentions: tuple

    def sentence_offsets(self):
        """Global token offset of each sentence start."""
        offsets = []
        total = 0
        for sent in self.sentences:
            offsets.append(total)
            total += len(sent)
        return offsets

    def head_position(self, mention):
        """Global document position of a mention's head token."""
        return self.sentence_offsets()[mention.sent] + mention.head

    def mention_tokens(self, mention):
        sent = self.sentences[mention.sent]
        return sent[mention.start:mention.end + 1]

    def mention_text(self, mention):
        return " ".join(self.mention_tokens(mention))


@dataclass(frozen=True)
class Clustering:
    """A partition of mentions 1..N into clusters 1..M.

    ``z[n-1]`` is the cluster id of mention n; ``clusters[m-1]`` lists the
    mention indices of cluster m in increasing order.  Ids must be exactly
    1..M with no gaps.
    """

    z: tuple
    clusters: tuple = field(init=False)

    def __post_init__(self):
        if not self.z:
            object.__setattr__(self, "z", ())
            object.__setattr__(self, "clusters", ())
            return
        ids = set(self.z)
        m = max(ids)
        if ids != set(range(1, m + 1)):
            raise ValueError("cluster ids must be 1..M with no gaps, got %s"
                             % sorted(ids))
        members = [[] for _ in range(m)]
        for n, cid in enumerate(self.z, start=1):
            members[cid - 1].append(n)
        object.__setattr__(self, "z", tuple(self.z))
        object.__setattr__(self, "clusters",
                           tuple(tuple(c) for c in members))

    @property
    def num_mentions(self):
        return len(self.z)

    @property
    def num_clusters(self):
        return len(self.clusters)

    @classmethod
    def from_clusters(cls, clusters):
        """Build from mention-index lists; ids follow the given order."""
        n_total = sum(len(c) for c in clusters)
        z = [0] * n_total
        for cid, members in enumerate(clusters, start=1):
            for n in members:
                if not 1 <= n <= n_total or z[n - 1]:
                    raise ValueError("mention %d not in exactly one cluster" % n)
                z[n - 1] = cid
        return cls(tuple(z))

    def canonical(self):
        """Renumber clusters by first-mention order (canonical equality)."""
        remap = {}
        z = []
        for cid in self.z:
            if cid not in remap:
                remap[cid] = len(remap) + 1
            z.append(remap[cid])
        return Clustering(tuple(z))

    def anaphoric(self, n):
        """True iff mention n has an earlier mention in its cluster."""
        return self.clusters[self.z[n - 1] - 1][0] != n


def _order_mentions(doc_id, sentences, raw_mentions):
    """Sort mentions by (head document position, span start) and assign n."""
    offsets = []
    total = 0
    for sent in sentences:
        offsets.append(total)
        total += len(sent)

    def key(m):
        return (offsets[m.sent] + m.head, m.start)

    ordered = sorted(raw_mentions, key=key)
    return tuple(replace(m, n=i) for i, m in enumerate(ordered, start=1))


def make_document(doc_id, genre, sentences, speakers, mentions):
    """Construct a Document with normalized mention ordering."""
    sentences = tuple(tuple(s) for s in sentences)
    return Document(
        id=doc_id,
        genre=genre,
        sentences=sentences,
        speakers=tuple(speakers),
        mentions=_order_mentions(doc_id, sentences, mentions),
    )


def validate_document(doc):
    """Check all Document/Mention invariants; returns a list of violations.

    An empty list means the document is well formed.  Violations are
    human-readable strings naming the document and mention.
    """
    errs = []

    def bad(msg, mention=None):
        where = "doc %s" % doc.id
        if mention is not None:
            where += " mention %d" % mention.n
        errs.append("%s: %s" % (where, msg))

    if doc.genre not in GENRES:
        bad("unknown genre %r" % doc.genre)
    if len(doc.speakers) != len(doc.sentences):
        bad("expected %d speakers, got %d"
            % (len(doc.sentences), len(doc.speakers)))

    for m in doc.mentions:
        if not 0 <= m.sent < len(doc.sentences):
            bad("sentence index %d out of range" % m.sent, m)
            continue
        sent_len = len(doc.sentences[m.sent])
        if not (0 <= m.start <= m.end < sent_len):
            bad("span [%d,%d] outside sentence of length %d"
                % (m.start, m.end, sent_len), m)
        if not m.start <= m.head <= m.end:
            bad("head offset %d outside span [%d,%d]"
                % (m.head, m.start, m.end), m)
        if m.mtype not in MENTION_TYPES:
            bad("unknown mention type %r" % m.mtype, m)
        if m.number not in NUMBERS:
            bad("unknown number %r" % m.number, m)
        if m.gender not in GENDERS:
            bad("unknown gender %r" % m.gender, m)
        if m.cluster is not None and (not isinstance(m.cluster, int)
                                      or m.cluster < 1):
            bad("gold cluster id must be a positive integer", m)

    # Ordering: by head document position, ties by span start; n = rank.
    offsets = doc.sentence_offsets()
    prev_key = None
    for i, m in enumerate(doc.mentions, start=1):
        if m.n != i:
            bad("mention index %d does not match rank %d" % (m.n, i), m)
        if not 0 <= m.sent < len(doc.sentences):
            continue
        key = (offsets[m.sent] + m.head, m.start)
        if prev_key is not None and key < prev_key:
            bad("mentions out of document order", m)
        prev_key = key
    return errs


def oracle_clustering(doc):
    """Gold mention-to-cluster map.

    Mentions sharing a gold cluster id are co-clustered; unlabeled mentions
    become singletons.  Ids are renumbered 1..M by first appearance.
    """
    remap = {}
    z = []
    for m in doc.mentions:
        key = ("gold", m.cluster) if m.cluster is not None else ("single", m.n)
        if key not in remap:
            remap[key] = len(remap) + 1
        z.append(remap[key])
    return Clustering(tuple(z))


def mention_category(doc, n):
    """Error-taxonomy category of mention n.

    Pronominal mentions are Pron; nominal/proper mentions are NomHM when
    some earlier mention has a case-insensitively equal head string,
    NomNoHM otherwise.
    """
    mention = doc.mentions[n - 1]
    if mention.mtype == "pronominal":
        return PRON
    head = mention.head_str.lower()
    for prev in doc.mentions[:n - 1]:
        if prev.head_str.lower() == head:
            return NOM_HM
    return NOM_NO_HM


def _mention_from_json(obj, line):
    try:
        return Mention(
            n=0,
            sent=obj["sent"],
            start=obj["start"],
            end=obj["end"],
            head=obj["head"],
            mtype=obj["type"],
            number=obj["number"],
            gender=obj["gender"],
            head_str=obj["head_str"],
            cluster=obj.get("cluster"),
        )
    except KeyError as exc:
        raise CorpusError("mention record missing field %s" % exc, line)


def _mention_to_json(m):
    obj = {
        "sent": m.sent, "start": m.start, "end": m.end, "head": m.head,
        "type": m.mtype, "number": m.number, "gender": m.gender,
        "head_str": m.head_str,
    }
    if m.cluster is not None:
        obj["cluster"] = m.cluster
    return obj


def load_documents(path):
    """Read a corpus file (one JSON document per line).

    Raises CorpusError with a line number on parse failures and ValueError
    naming the document on invariant violations.
    """
    docs = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError("invalid JSON (%s)" % exc.msg, lineno)
            for key in ("id", "genre", "sentences", "speakers", "mentions"):
                if key not in obj:
                    raise CorpusError("document missing field %r" % key, lineno)
            doc = make_document(
                obj["id"], obj["genre"], obj["sentences"], obj["speakers"],
                [_mention_from_json(m, lineno) for m in obj["mentions"]],
            )
            errs = validate_document(doc)
            if errs:
                raise ValueError("invalid document: " + "; ".join(errs))
            docs.append(doc)
    return docs


def save_documents(docs, path, with_gold=True):
    """Write documents in the corpus line format.

    ``with_gold=False`` omits gold cluster ids (the predict-time format).
    """
    with open(path, "w", encoding="utf-8") as handle:
        for doc in docs:
            mentions = doc.mentions
            if not with_gold:
                mentions = [replace(m, cluster=None) for m in mentions]
            obj = {
                "id": doc.id,
                "genre": doc.genre,
                "sentences": [list(s) for s in doc.sentences],
                "speakers": list(doc.speakers),
                "mentions": [_mention_to_json(m) for m in mentions],
            }
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")
