#!/usr/bin/env python3
"""Regenerate the bundled French word list (src/motsocr/data/french_words.txt).

The list is built from hand-maintained seed vocabulary: a frequency-ordered
core of function words and very common words, followed by regularly
inflected forms (verb conjugations, noun plurals, adjective agreement) and
a few apostrophe/hyphen compounds. The first 300 entries are short,
letters-plus-accents-only words so reduced-scale experiments get a clean
alphabet; signs (apostrophes, hyphens) appear further down the list.

Output: one UTF-8 word per line, no duplicates, exactly 5000 entries.
"""
from __future__ import annotations

import sys
from pathlib import Path

TARGET = 5000

# Frequency-ordered core: articles, pronouns, prepositions, conjunctions,
# numbers, common adverbs/nouns/adjectives. Letters and accents only.
CORE = """
le la les un une des de du au aux et ou mais donc or ni car que qui quoi
dont il elle ils elles je tu nous vous on ce cette ces cet se sa son ses
mon ma mes ton ta tes notre votre leur leurs lui eux moi toi soi en y pas
ne plus moins très bien mal peu beaucoup trop assez aussi encore toujours
jamais souvent parfois ici là où quand comment pourquoi si oui non avec
sans pour par sur sous dans entre vers chez avant après pendant depuis
contre malgré selon parmi sauf hors dès être avoir faire dire aller voir
savoir pouvoir vouloir venir devoir prendre trouver donner falloir parler
mettre passer regarder aimer croire demander rester répondre vivre tenir
comprendre entendre attendre sortir connaître penser montrer sembler
laisser devenir revenir arriver rentrer partir monter descendre suivre
mourir naître écrire lire jour nuit matin soir semaine mois année temps
heure minute monde pays ville maison rue porte fenêtre chambre cuisine
table chaise lit eau feu air terre mer ciel soleil lune pluie neige vent
froid chaud père mère fils fille frère soeur femme homme enfant ami amie
gens famille coeur corps tête main bras pied oeil yeux bouche nez oreille
cheveux dos ventre jambe doigt peau sang vie mort amour paix guerre
travail argent prix chose objet idée mot nom langue voix bruit silence
musique chanson livre page image photo film jeu sport école classe
maître élève leçon devoir papier stylo crayon chien chat oiseau poisson
cheval vache mouton cochon lapin souris arbre fleur herbe feuille fruit
pomme poire banane orange raisin pain lait fromage beurre oeuf viande
poulet riz soupe sel sucre café thé vin bière verre tasse assiette
couteau fourchette cuillère sac poche clé montre robe jupe pantalon
chemise manteau chapeau gant route chemin pont gare train avion bateau
voiture vélo bus métro taxi nord sud est ouest droite gauche haut bas
grand petit gros mince long court large étroit jeune vieux neuf ancien
beau joli laid bon mauvais meilleur pire vrai faux juste faux propre sale
plein vide ouvert fermé fort faible dur mou doux lourd léger rapide lent
facile difficile simple possible premier dernier seul même autre tout
tous toute toutes rien personne quelque chacun plusieurs certain deux
trois quatre cinq six sept huit neuf dix onze douze treize quatorze
quinze seize vingt trente quarante cinquante soixante cent mille rouge
bleu vert jaune noir blanc gris rose brun violet clair foncé midi minuit
hier demain tôt tard déjà bientôt soudain enfin alors ensuite puis
d'abord presque environ ainsi aussitôt cependant pourtant néanmoins
toutefois davantage tellement vraiment notamment également seulement
être été âge île hôtel forêt château fête tête rêve père mère frère
très près après dès succès accès procès progrès excès
""".split()

# Apostrophe and hyphen compounds (signs beyond accents); appended after
# the clean prefix.
COMPOUNDS = """
c'est n'est qu'il qu'elle qu'on s'il d'un d'une l'un l'une d'accord
aujourd'hui jusqu'à lorsqu'il puisqu'il quelqu'un presqu'île
peut-être c'est-à-dire est-ce au-delà au-dessus au-dessous ci-dessus
ci-dessous celui-ci celui-là celle-ci celle-là ceux-ci ceux-là lui-même
elle-même eux-mêmes moi-même toi-même soi-même vis-à-vis rendez-vous
là-bas là-haut grand-mère grand-père demi-heure après-midi avant-hier
week-end porte-monnaie chef-d'oeuvre arc-en-ciel
""".split()

# Regular -er verbs with non-mutating stems.
ER_VERBS = """
parler donner penser trouver porter garder montrer rester passer jouer
marcher chanter danser écouter travailler habiter étudier dessiner
fermer tomber laver casser couper pousser tirer sauter voler rouler
tourner monter visiter inviter accepter refuser oublier raconter
expliquer chercher toucher crier pleurer sourire gagner perdre aider
aimer adorer détester préparer cuisiner goûter dîner déjeuner souper
compter calculer mesurer peser payer coûter vendre acheter louer bâtir
décider espérer rêver imaginer créer former changer bouger garder
attraper lancer poser placer ranger nettoyer sécher mouiller chauffer
refroidir allumer éteindre brancher signer coller déchirer plier
""".split()

# Regular -ir verbs (finir pattern).
IR_VERBS = """
finir choisir réussir réfléchir remplir grandir grossir maigrir vieillir
rougir pâlir jaunir noircir blanchir verdir guérir punir nourrir obéir
réunir définir établir franchir ralentir atterrir applaudir avertir
accomplir adoucir affaiblir agrandir
""".split()

# Regular -re verbs (vendre pattern).
RE_VERBS = """
vendre attendre entendre répondre descendre perdre rendre défendre
dépendre étendre fondre tondre mordre tordre correspondre confondre
""".split()

NOUNS = """
chose temps moment endroit place côté bord coin centre milieu bout fin
début suite raison cause effet but moyen façon manière sorte genre type
forme taille couleur goût odeur saveur matière bois fer verre pierre
sable or argent cuivre plomb papier carton tissu laine coton cuir
plastique caoutchouc histoire conte légende récit roman poème phrase
lettre syllabe accent signe symbole chiffre nombre calcul somme reste
produit double moitié quart tiers partie ensemble groupe équipe membre
chef patron ouvrier paysan marchand client vendeur acheteur voisin
étranger voyageur visiteur invité hôte témoin juge avocat docteur
médecin infirmier malade blessé mort vivant soldat capitaine général
roi reine prince princesse seigneur serviteur esclave berger chasseur
pêcheur fermier jardinier boulanger boucher épicier coiffeur tailleur
cordonnier forgeron menuisier maçon peintre musicien chanteur danseur
acteur artiste écrivain poète savant professeur étudiant camarade
copain voyou voleur menteur paresseux courageux bureau usine magasin
boutique marché foire église temple palais tour mur toit plafond sol
plancher escalier marche couloir salon grenier cave garage jardin cour
champ pré bois source rivière fleuve lac étang mare île plage côte
falaise montagne colline vallée plaine désert rocher caverne grotte
sentier carrefour place fontaine puits barrière clôture grille poteau
panneau affiche enseigne lampe bougie torche lanterne miroir cadre
tableau horloge pendule réveil calendrier carnet cahier registre
journal revue annonce nouvelle message avis ordre conseil promesse
mensonge vérité secret mystère doute certitude espoir crainte peur
colère joie tristesse bonheur malheur chance malchance courage force
faiblesse santé maladie fièvre douleur blessure remède poison repas
festin goûter dessert gâteau tarte crème miel confiture chocolat
bonbon biscuit galette crêpe omelette salade légume carotte chou
oignon pomme_de_terre haricot pois champignon noix noisette amande
cerise fraise framboise prune pêche abricot melon citron figue datte
olive herbe blé avoine orge seigle maïs paille foin grain graine
racine tige branche tronc écorce bourgeon épine mousse lierre chêne
sapin pin hêtre bouleau peuplier saule tilleul olivier pommier poirier
cerisier vigne rose lys tulipe violette marguerite muguet lilas oeillet
loup renard ours cerf sanglier lièvre écureuil hérisson taupe blaireau
aigle faucon hibou chouette corbeau pie merle rossignol hirondelle
moineau pigeon canard oie cygne poule coq dindon paon perroquet serpent
lézard grenouille crapaud tortue escargot limace araignée mouche
moustique abeille guêpe fourmi papillon chenille sauterelle criquet
scarabée ver requin baleine dauphin truite saumon carpe brochet anguille
crabe crevette homard huître moule étoile nuage orage éclair tonnerre
foudre brouillard rosée gelée givre glace flocon averse tempête ouragan
aube aurore crépuscule ombre lumière rayon chaleur fraîcheur humidité
sécheresse saison printemps automne hiver siècle époque instant seconde
quartier village hameau capitale banlieue avenue boulevard impasse
trottoir chaussée carreau vitre serrure verrou marteau clou vis scie
hache pelle râteau brouette échelle corde ficelle fil aiguille ciseau
bouton ruban noeud drap couverture oreiller matelas armoire tiroir
étagère coffre panier corbeille seau bouteille cruche pot bol plateau
casserole poêle four cheminée fumée cendre braise flamme étincelle
""".split()

ADJECTIVES = """
grand petit bon mauvais beau nouveau vieux jeune gros mince haut bas
long court large étroit fort faible dur mou doux rude lourd léger
rapide lent chaud froid tiède frais sec humide propre sale clair
sombre vif terne riche pauvre cher gratuit plein vide entier demi
simple double triple facile difficile utile inutile possible impossible
certain incertain vrai faux juste injuste bon méchant gentil cruel
sage fou calme nerveux content triste heureux malheureux fier honteux
poli impoli honnête malhonnête fidèle curieux sérieux joyeux furieux
peureux courageux prudent imprudent adroit maladroit habile savant
ignorant célèbre inconnu présent absent proche lointain voisin dernier
prochain ancien moderne futur passé libre occupé seul nombreux rare
fréquent commun étrange bizarre normal naturel artificiel solide
fragile souple raide pointu rond carré plat creux épais fin profond
superficiel intérieur extérieur supérieur inférieur central latéral
principal secondaire général particulier public privé national local
mondial entier complet incomplet parfait imparfait pur impur net flou
""".split()


def er_forms(verb: str) -> list[str]:
    stem = verb[:-2]
    soft = stem + "e" if stem.endswith("g") else (stem[:-1] + "ç" if stem.endswith("c") else stem)
    forms = [verb]
    forms += [stem + s for s in ("e", "es", "ent")]
    forms += [soft + s for s in ("ons", "ais", "ait", "aient", "a", "ai")]
    forms += [stem + s for s in ("ez", "ions", "iez")]
    forms += [verb + s for s in ("ai", "as", "a", "ons", "ez", "ont", "ais", "ait", "aient")]
    forms += [stem + s for s in ("é", "ée", "és", "ées")]
    forms.append(soft + "ant")
    return forms


def ir_forms(verb: str) -> list[str]:
    stem = verb[:-2]
    forms = [verb]
    forms += [stem + s for s in ("is", "it", "issons", "issez", "issent")]
    forms += [stem + s for s in ("issais", "issait", "issaient", "issant")]
    forms += [verb + s for s in ("ai", "as", "a", "ons", "ez", "ont", "ait")]
    forms += [stem + s for s in ("i", "ie", "is", "ies")]
    return forms


def re_forms(verb: str) -> list[str]:
    stem = verb[:-2]
    forms = [verb]
    forms += [stem + s for s in ("s", "", "ons", "ez", "ent")]
    forms += [stem + s for s in ("ais", "ait", "aient", "ant", "u", "ue", "us", "ues")]
    forms += [stem + s for s in ("rai", "ras", "ra", "rons", "rez", "ront", "rait")]
    return forms


def noun_forms(noun: str) -> list[str]:
    noun = noun.replace("_", "")  # pomme_de_terre guard; keep single tokens
    if noun.endswith(("s", "x", "z")):
        return [noun]
    if noun.endswith("al"):
        return [noun, noun[:-2] + "aux"]
    if noun.endswith(("au", "eu")):
        return [noun, noun + "x"]
    return [noun, noun + "s"]


def adjective_forms(adj: str) -> list[str]:
    forms = [adj]
    if adj.endswith("e"):
        forms.append(adj + "s")
    elif adj.endswith(("s", "x")):
        forms.append(adj + "e" if not adj.endswith("eux") else adj[:-1] + "se")
    else:
        fem = adj + "e"
        if adj.endswith("er"):
            fem = adj[:-2] + "ère"
        elif adj.endswith("f"):
            fem = adj[:-1] + "ve"
        elif adj.endswith(("el", "en", "on", "et")):
            fem = adj + adj[-1] + "e"
        forms += [fem, adj + "s", fem + "s"]
    return forms


def build() -> list[str]:
    words: list[str] = []
    seen: set[str] = set()

    def add(w: str) -> None:
        if w and w not in seen:
            seen.add(w)
            words.append(w)

    for w in CORE:
        add(w)
    for v in ER_VERBS:
        for w in er_forms(v):
            add(w)
    for v in IR_VERBS:
        for w in ir_forms(v):
            add(w)
    for v in RE_VERBS:
        for w in re_forms(v):
            add(w)
    for n in NOUNS:
        for w in noun_forms(n):
            add(w)
    for a in ADJECTIVES:
        for w in adjective_forms(a):
            add(w)
    for w in COMPOUNDS:
        add(w)

    if len(words) < TARGET:
        raise SystemExit(f"only {len(words)} words generated, need {TARGET}")
    return words[:TARGET]


def main() -> None:
    out = Path(__file__).resolve().parents[1] / "src" / "motsocr" / "data" / "french_words.txt"
    words = build()
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(words) + "\n", encoding="utf-8")
    print(f"wrote {len(words)} words to {out}")


if __name__ == "__main__":
    sys.exit(main())
