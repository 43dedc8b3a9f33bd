#!/usr/bin/env python3
"""Generate the bundled synthetic sample corpora.

documents.txt        one web-style document per line, mostly English
conversations.jsonl  multilingual chat records in the native schema

Output is a pure function of --seed.
"""

import argparse
import json
import random
from pathlib import Path

FUNCTION = """the of and to a in is that for it on with as was by be this are at from or an
which have not but his they has had were their been one all more can we its also
there when who will would about into than other some these only new after over
what so if no may such most out up time two first any many then them those each""".split()

COMMON = """people year world state city water school family group country system program
company number part place case week point government area house business service
market report life day history music health study game team policy research
community development information table money member power issue effect level
office process name student result change order light food room field president
experience question rate industry value support event center law price energy
data model project design building season road cost growth plan period county
former major public local national early large small high long best great local
american between during under within without including several however although
because through around against another while since until later often still
years known became began made used found called based held became located among
last second third next final three four five six ten hundred thousand million
north south east west river street island park church station museum village
university college club league player coach film album song book series show
article page website site online video image photo post news today free home
please click here read more view full contact privacy terms copyright reserved
recipe cup cups salt sugar butter oil flour minutes heat oven serve mix add bake
hotel beach trip travel flight tour guest room rooms night nights stay visit
product quality price order shipping customer review reviews purchase buy item
season match goal scored win won lost final league cup players coach victory
council election vote mayor court judge police officer minister bill tax budget
""".split()

CHAT_EN = """i you your my me please help thanks thank sure here is explain write
code function example how why what can could would should answer question tell
list steps step let know like want need make use using create give show try
following simple short detailed summary summarize translate rewrite improve
essay email story poem letter script python javascript error bug fix issue
understand following note important however also first second finally hope
helps certainly great question sorry unable provide information assistant
ai language model response input output file value variable return loop array
string class method object key user data query database sql server api request
""".split()

LANG = {
    "es": """el la de que y en un una los las por con para es no se del al lo como más
pero sus le ya o este sí porque esta entre cuando muy sin sobre también me hasta hay
donde quien desde todo nos durante todos uno les ni contra otros ese eso ante ellos
puedes ayuda ayudar escribir explicar ejemplo código pregunta respuesta gracias
hola quiero necesito tiempo vida mundo casa día año trabajo ciudad país gente
forma parte caso manera hecho problema historia libro agua noche persona""".split(),
    "fr": """le la les de des du et en un une est que qui dans pour pas sur au avec il
elle ne se ce plus par son sont mais comme ou nous vous leur bien tout aussi fait
être avoir très sans peut entre après deux temps jour monde vie homme femme pays
ville travail question réponse merci bonjour aide aider écrire expliquer exemple
code je veux besoin pourquoi comment quelle quel faire dire voir donner""".split(),
    "de": """der die das und in den von zu mit ist sich des auf für nicht ein eine als
auch es an werden aus er hat dass sie nach wird bei einer um am sind noch wie einem
über einen so zum war haben nur oder aber vor zur bis mehr durch man sein wurde
kannst hilfe helfen schreiben erklären beispiel frage antwort danke hallo ich
möchte brauche zeit leben welt haus tag jahr arbeit stadt land menschen""".split(),
    "pt": """o a de que e do da em um para é com não uma os no se na por mais as dos
como mas foi ao ele das tem à seu sua ou ser quando muito há nos já está eu também
só pelo pela até isso ela entre era depois sem mesmo aos ter seus quem nas me
você pode ajuda ajudar escrever explicar exemplo código pergunta resposta obrigado
olá quero preciso tempo vida mundo casa dia ano trabalho cidade país pessoas""".split(),
    "ru": """и в не на я что тот быть с а весь это как она по но они к у ты из мы за
вы так же от сказать этот который мочь человек о один еще бы такой только себя свое
какой когда уже для вот кто да говорить год знать мой до или если время рука нет
самый ни стать большой даже другой наш свой ну под где дело есть сам раз чтобы два
помощь помочь написать объяснить пример код вопрос ответ спасибо привет хочу нужно
жизнь мир дом день работа город страна люди""".split(),
    "zh": """的 一 是 不 了 在 人 有 我 他 这 个 们 中 来 上 大 为 和 国 地 到 以 说 时 要 就 出 会
可以 我们 你们 他们 什么 没有 知道 一个 因为 所以 但是 如果 这个 那个 时候 现在 问题 工作 学习
中国 公司 朋友 今天 明天 喜欢 非常 需要 帮助 帮我 写 一篇 文章 解释 代码 例子 如何 怎么 为什么
请 谢谢 你好 回答 介绍 关于 方法 发展 经济 社会 文化 历史 技术 数据 系统 用户 程序 函数""".split(),
    "ja": """の に は を た が で て と し れ さ ある いる も する から な こと として い や れる
など なっ ない この ため その あっ よう また もの という あり まで られ なる へ か だ
これ によって により おり より による ず なり られる において ば なかっ なく しかし
について せ だっ その後 できる それ う ので なお のみ でき き つ における および
私 あなた 日本 問題 説明 してください 書いて 教えて ありがとう こんにちは 例 コード""".split(),
    "ko": """이 그 저 것 수 등 들 및 에서 으로 를 을 는 은 가 의 에 와 과 도 로 하다 있다
되다 없다 않다 그리고 하지만 그래서 때문에 나 너 우리 당신 사람 시간 문제 질문 대답
감사합니다 안녕하세요 설명해 주세요 작성해 예제 코드 방법 어떻게 왜 무엇 한국 회사""".split(),
}

LANG_WEIGHTS = [("en", 62), ("zh", 9), ("es", 6), ("ru", 5), ("de", 4), ("fr", 4),
                ("pt", 4), ("ja", 3), ("ko", 3)]

SYLLABLES = """ka ri to mi sa no ve lo an el or in ta ne ro di sel mar ton ber gen vil
lan dor tis ham wick ford ley ston burg ville field by ton ia ica ous ent ism ics""".split()

SNIPPETS = [
    "def {f}({a}, {b}):\n    result = {a} + {b}\n    return result\n",
    "for i in range(len({a})):\n    if {a}[i] > {b}:\n        print({a}[i])\n",
    "const {f} = ({a}) => {{\n  return {a}.map(x => x * 2);\n}};\n",
    "import numpy as np\n{a} = np.array([1, 2, 3])\nprint({a}.mean())\n",
    "SELECT {a}, COUNT(*) FROM {b} GROUP BY {a} ORDER BY 2 DESC;\n",
    "class {F}:\n    def __init__(self, {a}):\n        self.{a} = {a}\n",
    "try:\n    {f}({a})\nexcept ValueError as e:\n    print(f\"error: {{e}}\")\n",
    "int {f}(int {a}) {{\n    return {a} * {a};\n}}\n",
]

IDENTS = "data items value count total user_id name result df config path text".split()


class Zipf:
    def __init__(self, words, s=1.05):
        self.words = words
        self.weights = [1.0 / (r + 1) ** s for r in range(len(words))]

    def pick(self, rng, k=1):
        return rng.choices(self.words, weights=self.weights, k=k)


def rare_words(rng, n):
    out = set()
    while len(out) < n:
        out.add("".join(rng.choice(SYLLABLES) for _ in range(rng.randint(2, 4))))
    return sorted(out)


class Generator:
    def __init__(self, seed):
        self.rng = random.Random(seed)
        rare = rare_words(self.rng, 4000)
        self.rng.shuffle(rare)
        self.en = Zipf(FUNCTION + COMMON + rare)
        self.chat = Zipf(FUNCTION[:40] + CHAT_EN + COMMON[:300] + rare[:1500])
        self.names = [w.capitalize() for w in rare[:600]]
        self.lang = {k: Zipf(v, 0.9) for k, v in LANG.items()}

    def sentence(self, lex, lo=6, hi=22):
        rng = self.rng
        words = lex.pick(rng, rng.randint(lo, hi))
        out = []
        for i, w in enumerate(words):
            if rng.random() < 0.06:
                w = rng.choice(self.names)
            elif rng.random() < 0.03:
                w = str(rng.choice([rng.randint(1, 99), rng.randint(1900, 2024), rng.randint(100, 99999)]))
            out.append(w)
            if i + 1 < len(words) and rng.random() < 0.07:
                out[-1] += ","
        s = " ".join(out)
        return s[0].upper() + s[1:] + rng.choice([".", ".", ".", ".", "!", "?"])

    def foreign_sentence(self, lang):
        rng = self.rng
        words = self.lang[lang].pick(rng, rng.randint(5, 18))
        if lang in ("zh", "ja"):
            return "".join(words) + rng.choice(["。", "。", "？", "！"])
        if lang == "ko":
            return " ".join(words) + rng.choice([".", "?"])
        s = " ".join(words)
        return s[0].upper() + s[1:] + rng.choice([".", ".", "?"])

    def document(self):
        rng = self.rng
        if rng.random() < 0.12:
            lang = rng.choices([l for l, _ in LANG_WEIGHTS[1:]], weights=[w for _, w in LANG_WEIGHTS[1:]])[0]
            return " ".join(self.foreign_sentence(lang) for _ in range(rng.randint(4, 14)))
        parts = [" ".join(rng.choice(self.names) if rng.random() < 0.3 else w.capitalize()
                          for w in self.en.pick(rng, rng.randint(3, 8)))]
        for _ in range(rng.randint(4, 18)):
            parts.append(self.sentence(self.en if rng.random() < 0.9 else self.chat))
        if rng.random() < 0.2:
            parts.append(f"Posted on {rng.randint(1, 28)}/{rng.randint(1, 12)}/{rng.randint(2005, 2023)}.")
        return " ".join(parts)

    def code_block(self):
        rng = self.rng
        a, b = rng.sample(IDENTS, 2)
        f = rng.choice(["compute", "process", "parse_input", "helper", "main", "transform"])
        lang = rng.choice(["python", "python", "javascript", "sql", ""])
        body = rng.choice(SNIPPETS).format(a=a, b=b, f=f, F=f.capitalize())
        return f"```{lang}\n{body}```"

    def user_turn(self, lang):
        rng = self.rng
        if lang != "en":
            return " ".join(self.foreign_sentence(lang) for _ in range(rng.randint(1, 3)))
        parts = [self.sentence(self.chat, 4, 14)]
        r = rng.random()
        if r < 0.2:
            parts.append(self.code_block())
        elif r < 0.3:
            parts.append(f"Traceback: {rng.choice(['KeyError', 'TypeError', 'IndexError'])}: "
                         f"'{rng.choice(IDENTS)}' at line {rng.randint(1, 400)}")
        elif r < 0.45:
            parts.append(self.sentence(self.en))
        text = "\n".join(parts)
        if rng.random() < 0.3:
            text = text.lower()
        return text

    def assistant_turn(self, lang):
        rng = self.rng
        if lang != "en":
            return "\n\n".join(" ".join(self.foreign_sentence(lang) for _ in range(rng.randint(2, 4)))
                               for _ in range(rng.randint(1, 3)))
        parts = [rng.choice(["Sure!", "Certainly!", "Of course.", "Great question!", "Here is an answer."])
                 + " " + self.sentence(self.chat)]
        style = rng.random()
        if style < 0.35:
            for i in range(rng.randint(3, 6)):
                parts.append(f"{i + 1}. **{self.en.pick(rng)[0].capitalize()}**: {self.sentence(self.chat)}")
        elif style < 0.55:
            parts.append(self.code_block())
            parts.append(self.sentence(self.chat))
        else:
            for _ in range(rng.randint(2, 4)):
                parts.append(" ".join(self.sentence(self.chat if rng.random() < 0.6 else self.en)
                                      for _ in range(rng.randint(2, 4))))
        if rng.random() < 0.4:
            parts.append("I hope this helps! Let me know if you have any other questions.")
        return "\n\n".join(parts)

    def conversation(self, index):
        rng = self.rng
        lang = rng.choices([l for l, _ in LANG_WEIGHTS], weights=[w for _, w in LANG_WEIGHTS])[0]
        turns = []
        for _ in range(rng.choices([1, 2, 3], weights=[6, 3, 1])[0]):
            turns.append({"role": "user", "content": self.user_turn(lang)})
            turns.append({"role": "assistant", "content": self.assistant_turn(lang)})
        model = rng.choice(["vicuna-13b", "koala-13b", "alpaca-13b", "chatglm-6b", "llama-13b"])
        return {"id": f"c{index:06d}", "model": model, "language": lang, "turns": turns}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "samples"))
    ap.add_argument("--seed", type=int, default=2023)
    ap.add_argument("--bytes", type=int, default=2 * 1024 * 1024)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    gen = Generator(args.seed)
    with open(out / "documents.txt", "w", encoding="utf-8", newline="\n") as f:
        total = 0
        while total < args.bytes:
            line = gen.document() + "\n"
            total += len(line.encode("utf-8"))
            f.write(line)

    with open(out / "conversations.jsonl", "w", encoding="utf-8", newline="\n") as f:
        total, i = 0, 0
        while total < args.bytes:
            line = json.dumps(gen.conversation(i), ensure_ascii=False) + "\n"
            total += len(line.encode("utf-8"))
            f.write(line)
            i += 1


if __name__ == "__main__":
    main()
