import type { ApiClient } from "./api";
import { PodCard, type PodCardOptions } from "./card";
import type { PodEntry } from "./types";

/**
 * Side-by-side collection of independently driven pod scenes. Adding the
 * same pod twice yields two cards with their own streams and cursors;
 * removing a card closes its stream.
 */
export class Shelf {
  readonly cards: PodCard[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly container: HTMLElement,
    private readonly cardOptions: PodCardOptions = {},
  ) {}

  async add(entry: PodEntry): Promise<PodCard> {
    const card = new PodCard(this.api, entry, this.cardOptions);
    card.onRemove = () => {
      const index = this.cards.indexOf(card);
      if (index >= 0) {
        this.cards.splice(index, 1);
      }
    };
    this.container.appendChild(card.element);
    this.cards.push(card);
    await card.start();
    return card;
  }

  remove(card: PodCard): void {
    card.dispose();
    const index = this.cards.indexOf(card);
    if (index >= 0) {
      this.cards.splice(index, 1);
    }
  }
}
